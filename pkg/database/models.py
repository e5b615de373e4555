"""
Модели данных для SQLite
"""

# SQL схемы таблиц

RULES_TABLE = """
CREATE TABLE IF NOT EXISTS rules (
    digest TEXT PRIMARY KEY,
    name TEXT NOT NULL,
    kind TEXT NOT NULL,
    summary TEXT DEFAULT '{}',
    first_seen TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
    last_used TIMESTAMP DEFAULT CURRENT_TIMESTAMP
)
"""

REPORTS_TABLE = """
CREATE TABLE IF NOT EXISTS reports (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    rule_digest TEXT,
    command TEXT NOT NULL,
    params TEXT DEFAULT '{}',
    exit_code INTEGER NOT NULL,
    report TEXT NOT NULL,
    created_at TIMESTAMP DEFAULT CURRENT_TIMESTAMP,
    FOREIGN KEY (rule_digest) REFERENCES rules (digest)
)
"""

REPORTS_INDEX = """
CREATE INDEX IF NOT EXISTS idx_reports_rule ON reports (rule_digest, command)
"""

ALL_TABLES = [
    RULES_TABLE,
    REPORTS_TABLE,
    REPORTS_INDEX,
]
