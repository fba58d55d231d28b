from json import duumps

def encode(data):
    return duumps(data)
