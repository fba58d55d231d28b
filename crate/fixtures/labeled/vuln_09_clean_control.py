import sqlite3

def fetch_safe(cur, uid):
    cur.execute("SELECT * FROM users WHERE id = ?", (uid,))
    return cur.fetchall()
