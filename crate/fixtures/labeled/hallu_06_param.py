import json

def pretty(data):
    return json.dumps(data, indnt=2)
