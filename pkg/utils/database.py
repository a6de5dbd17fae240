"""
运行档案库（sqlite）
档案放在输出目录之外，带时间戳也不影响输出树的逐字节复现。
"""

import json
import os
import sqlite3
from datetime import datetime

import pandas as pd

from models.hypergraph import format_fraction

_CURRENT_DIR = os.path.dirname(os.path.abspath(__file__))
_PROJECT_ROOT = os.path.abspath(os.path.join(_CURRENT_DIR, '..'))
DEFAULT_DB_PATH = os.path.join(_PROJECT_ROOT, 'data', 'run_archive.db')

RECORD_COLUMNS = ['id', 'run_timestamp', 'scenario', 'scenario_hash', 'seeds', 'cog_syn', 'out_dir',
                  'tool_version']


def db_path():
    """COGSYN_DB_PATH 优先，否则使用项目根目录下的 data/run_archive.db"""
    return os.environ.get('COGSYN_DB_PATH') or DEFAULT_DB_PATH


def get_db_connection():
    """建立并返回数据库连接"""
    path = db_path()
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    conn = sqlite3.connect(path)
    conn.row_factory = sqlite3.Row
    return conn


def init_db():
    """初始化数据库，创建或更新必要的表"""
    conn = get_db_connection()
    cursor = conn.cursor()

    cursor.execute('''
    CREATE TABLE IF NOT EXISTS run_records (
        id INTEGER PRIMARY KEY AUTOINCREMENT,
        run_timestamp TEXT NOT NULL,
        scenario TEXT NOT NULL,
        scenario_hash TEXT,
        seeds TEXT,
        cog_syn TEXT
    )
    ''')

    # 兼容旧档案库的升级逻辑
    cursor.execute("PRAGMA table_info(run_records)")
    columns = [row['name'] for row in cursor.fetchall()]
    if 'out_dir' not in columns:
        cursor.execute("ALTER TABLE run_records ADD COLUMN out_dir TEXT")
    if 'tool_version' not in columns:
        cursor.execute("ALTER TABLE run_records ADD COLUMN tool_version TEXT")

    conn.commit()
    conn.close()


def save_run_record(result, out_dir=None, tool_version=None, run_timestamp=None):
    """
    记录一次运行：场景、哈希、种子和各组协同指数（p/q 文本）
    """
    init_db()
    synergy = {'|'.join(report.processes): format_fraction(report.value) for report in result.synergy}
    conn = get_db_connection()
    cursor = conn.cursor()
    cursor.execute('''
    INSERT INTO run_records (run_timestamp, scenario, scenario_hash, seeds, cog_syn, out_dir, tool_version)
    VALUES (?, ?, ?, ?, ?, ?, ?)
    ''', (
        run_timestamp or datetime.now().strftime("%Y-%m-%d %H:%M:%S"),
        result.scenario.name,
        result.scenario.source_hash,
        json.dumps(dict(sorted(result.seeds.items()))),
        json.dumps(synergy, ensure_ascii=False),
        out_dir,
        tool_version,
    ))
    record_id = cursor.lastrowid
    conn.commit()
    conn.close()
    return record_id


def load_run_records(scenario=None):
    conn = get_db_connection()
    try:
        query = f"SELECT {', '.join(RECORD_COLUMNS)} FROM run_records"
        params = ()
        if scenario is not None:
            query += " WHERE scenario = ?"
            params = (scenario,)
        query += " ORDER BY run_timestamp DESC, id DESC"
        records_df = pd.read_sql_query(query, conn, params=params)
    except (pd.errors.DatabaseError, sqlite3.OperationalError):
        records_df = pd.DataFrame(columns=RECORD_COLUMNS)
    finally:
        conn.close()
    return records_df
