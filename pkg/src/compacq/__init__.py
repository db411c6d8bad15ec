"""compacq: compressed image acquisition pipeline simulator and analysis toolkit.

Pipeline stages: pixel binning -> bit truncation -> baseline JPEG -> (transmission)
-> decode -> brightness restore -> bicubic or DRCAS residual-network restoration.
"""

from .acquisition import (
    AcquisitionConfig,
    acquire,
    bin_average,
    parse_bin_mode,
    restore_brightness,
    truncate_bits,
)
from .analysis import (
    AnalysisReport,
    eval_config,
    raw_compression,
    size_percent,
    switching_activity,
)
from .image import (
    Image,
    PatchSpec,
    center_crop_to_multiple,
    load_image,
    psnr,
    sample_patches,
    save_image,
)
from .jpeg import jpeg_decode, jpeg_encode, quality_to_tables
from .restoration import (
    ConvLayer,
    DrcasModel,
    bicubic_upscale,
    conv2d,
    drcas_forward,
    load_weights,
    resblock_forward,
    save_weights,
    zero_model,
)

__version__ = "0.1.0"
