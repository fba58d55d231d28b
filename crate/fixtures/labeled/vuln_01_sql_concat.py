import sqlite3

def fetch_user(conn, uid):
    cur = conn.cursor()
    query = "SELECT * FROM users WHERE id = " + uid
    cur.execute(query)
    return cur.fetchall()
