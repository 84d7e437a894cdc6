"""Periocular expression recognition pipeline.

Landmark-driven normalization of the eye region, five block-based texture
descriptors (LBP, HOG, GABOR, GLCM, GIST), one-vs-one linear SVM
classification, and leave-one-subject-out evaluation.
"""

__version__ = "0.1.0"
