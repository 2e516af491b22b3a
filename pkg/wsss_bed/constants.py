IGNORE_LABEL = 255
BACKGROUND_LABEL = 0

# Label codes 1..C must stay below the ignore code
MAX_CLASS_COUNT = 254

DEFAULT_SALIENCY_THRESHOLD = 0.5

# Threshold sweep (start, stop, step)
DEFAULT_SWEEP_GRID = (0.05, 0.95, 0.05)
MAX_SWEEP_POINTS = 10_000

# Decimal places for every real written to a CSV report
REPORT_DECIMALS = 6

DEBUG_ENV_VAR = "WSSS_BED_DEBUG"
