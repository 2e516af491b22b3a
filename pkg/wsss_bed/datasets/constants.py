from typing import List, Tuple

ACTMAP_MAGIC = b"WBED"
ACTMAP_VERSION = 1
ACTMAP_SUFFIX = ".actmap"
PNG_SUFFIX = ".png"

VOC_CLASS_NAMES: Tuple[str, ...] = (
    "aeroplane", "bicycle", "bird", "boat", "bottle",
    "bus", "car", "cat", "chair", "cow",
    "diningtable", "dog", "horse", "motorbike", "person",
    "pottedplant", "sheep", "sofa", "train", "tvmonitor",
)
VOC_CLASS_COUNT = len(VOC_CLASS_NAMES)

COCO_CLASS_COUNT = 80

# 80-class contiguous COCO indices of the VOC categories, in VOC order
COCO_VOC_SUBSET: Tuple[int, ...] = (
    4, 1, 14, 8, 39,
    5, 2, 15, 56, 19,
    60, 16, 17, 3, 0,
    58, 18, 57, 6, 62,
)


def voc_palette() -> List[int]:
    """Standard 256-entry VOC colour map, flattened RGB for PIL putpalette."""
    palette: List[int] = []
    for index in range(256):
        r = g = b = 0
        code = index
        for shift in range(7, -1, -1):
            r |= ((code >> 0) & 1) << shift
            g |= ((code >> 1) & 1) << shift
            b |= ((code >> 2) & 1) << shift
            code >>= 3
        palette.extend((r, g, b))
    return palette
