//! Benchmark inputs shared by the criterion targets.

/// A mixed source sample: imports, assignments, calls, sinks, literals.
pub fn sample_source(repeats: usize) -> String {
    let block = r#"import os
import json
import sqlite3

def load_settings(path):
    with open(path) as fh:
        text = fh.read()
    settings = json.loads(text)
    return settings

def fetch_rows(cur, uid):
    query = "SELECT * FROM users WHERE id = " + uid
    cur.execute(query)
    return cur.fetchall()

def archive(root):
    names = os.listdir(root)
    for name in names:
        full = os.path.join(root, name)
        if os.path.isfile(full):
            record = json.dumps(full, indent=2)
    return names

password = "bench-secret"
host = os.getenv("DB_HOST")
os.system("ping -c 1 " + host)
"#;
    block.repeat(repeats)
}
