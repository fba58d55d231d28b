def run_snippet(snippet):
    exec(snippet)
    return None
