"""Turn grayscale luminance into wavelet-smoothed, printable relief meshes."""
from .heightmap import HeightField, gray_to_height, pad_to_even, rescale_axes, threshold_filter
from .luminance import GrayImage, RgbImage, encode_pnm, load_pnm, rgb_to_luminance, stats, to_gray
from .mesh import TriangleMesh, facet_normal, heightfield_to_mesh, validate
from .slicer import SlicePolygon, slice_all, slice_at, stitch_loops
from .stl import read_stl, write_stl_ascii, write_stl_binary
from .wavelet import (D4, HAAR, FilterBank, d4_highpass, d4_lowpass, detect_spikes,
                      haar_block_average, pyramid_smooth, separable_filter_2d)

__version__ = "0.1.0"
