"""
Box geometry: IoU, encodings, and resize remapping
==================================================

"""

# Boxes are corner-encoded: (x_min, y_min, x_max, y_max) in pixels.
from shipbench import Box2D, ImageDims, NormBox, iou

gt = Box2D(100, 100, 200, 200)
pred = Box2D(150, 150, 250, 250)
print("IoU of a half-overlapping pair:", iou(gt, pred))  # 2500 / 17500 = 1/7

# Disjoint boxes score zero; identical boxes score one.
print("disjoint:", iou(gt, Box2D(300, 300, 400, 400)))
print("identical:", iou(gt, gt))

# Annotation files store fractional center/size tuples. Converting to pixels
# needs the image dimensions.
from shipbench import norm_to_pixel, pixel_to_norm

dims = ImageDims(640, 640)
norm = NormBox(0.25, 0.25, 0.5, 0.5)
pixels = norm_to_pixel(norm, dims)
print("normalized", norm, "->", pixels)
print("and back:", pixel_to_norm(pixels, dims))

# Training resizes frames; annotations must follow. The remap multiplies
# before dividing, so halving an image maps exact pixel boundaries exactly.
from shipbench import remap_resize

wide = ImageDims(2274, 1494)
square = ImageDims(640, 640)
print("resized:", remap_resize(Box2D(0, 0, 1137, 747), wide, square))
