import sqlite3

def find_by_name(cur, name):
    cur.execute(f"SELECT id FROM users WHERE name = '{name}'")
    return cur.fetchone()
