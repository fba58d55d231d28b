#!/usr/bin/env python3
"""Reference subprocess adapter for `cmd:` endpoints.

Reads one JSON request line on stdin -- {prompt, specificity, temperature,
top_p, max_tokens, seed} -- and writes one JSON response line on stdout:
{code, backend_meta}. Replace `render` with a call into a real model host.

Usage in a run config:
    "endpoint": "cmd:python3 adapters/echo_adapter.py"
"""
import json
import sys


def render(request):
    # Deterministic placeholder "generation": a function stub that echoes
    # the prompt in its docstring.
    first_line = request["prompt"].splitlines()[0] if request["prompt"] else ""
    return (
        "def generated(data):\n"
        f"    \"\"\"{first_line}\"\"\"\n"
        "    return data\n"
    )


def main():
    request = json.loads(sys.stdin.readline())
    response = {
        "code": render(request),
        "backend_meta": {
            "adapter": "echo",
            "specificity": request["specificity"],
            "seed": request["seed"],
        },
    }
    sys.stdout.write(json.dumps(response) + "\n")


if __name__ == "__main__":
    main()
