import os

def prepare(path):
    os.makedirz(path)
    return path
