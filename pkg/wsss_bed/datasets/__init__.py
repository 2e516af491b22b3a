from .actmap import decode_actmap, encode_actmap, read_actmap, write_actmap
from .convert import ClassSubset, classwise_to_salient, degrade_saliency
from .layout import actmap_path, png_path
from .manifest import Manifest, ManifestEntry, read_manifest, write_manifest
from .png import read_gray_png, read_label_png, write_gray_png, write_label_png

__all__ = [
    "ClassSubset",
    "Manifest",
    "ManifestEntry",
    "actmap_path",
    "classwise_to_salient",
    "decode_actmap",
    "degrade_saliency",
    "encode_actmap",
    "png_path",
    "read_actmap",
    "read_gray_png",
    "read_label_png",
    "read_manifest",
    "write_actmap",
    "write_gray_png",
    "write_label_png",
    "write_manifest",
]
