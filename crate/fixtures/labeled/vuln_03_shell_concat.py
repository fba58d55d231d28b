import os

def ping(host):
    command = "ping -c 1 " + host
    os.system(command)
    return True
