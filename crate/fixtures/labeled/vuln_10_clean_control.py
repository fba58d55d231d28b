import os

def safe_listing(root):
    names = os.listdir(root)
    return sorted(names)
