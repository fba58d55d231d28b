import os

def base_name(path):
    return os.path.basenamee(path)
