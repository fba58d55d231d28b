import json
import os

def save(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=True)
    full = os.path.join(path, "out.json")
    return full
