import sqlite3

def lookup_user(cur):
    uid = input("user id: ")
    cur.execute("SELECT name FROM users WHERE id = " + uid)
    return cur.fetchone()
