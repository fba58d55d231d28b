import hashlib

password = "correct-horse-battery"
api_key = "sk-live-0042"

def token_digest(value):
    return hashlib.sha256(value)
