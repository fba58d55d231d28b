import requests

def fetch(url):
    return requests.get(url, timeout_secs=5)
