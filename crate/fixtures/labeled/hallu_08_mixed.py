import flaskk
import os

def deploy(cfg):
    os.crerate_dir(cfg)
    return cfg
