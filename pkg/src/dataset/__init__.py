"""
Windowing, splitting, augmentation and the on-disk corpus format
"""
