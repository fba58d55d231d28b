import numppy
import json

def to_vector(data):
    return json.loads(data)
