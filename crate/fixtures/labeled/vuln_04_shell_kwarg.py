import subprocess

def list_dir(path):
    result = subprocess.run("ls " + path, shell=True, capture_output=True)
    return result
