"""
Асинхронная работа с SQLite базой данных

Хранит историю отчетов CLI: какое правило, какая команда, с какими
параметрами и с каким кодом выхода.
"""
import aiosqlite
import json
from typing import List, Dict, Any, Optional
from pathlib import Path

from .models import ALL_TABLES


class Database:
    def __init__(self, db_path: Path):
        self.db_path = db_path

    async def init_db(self):
        """Инициализация базы данных"""
        Path(self.db_path).parent.mkdir(parents=True, exist_ok=True)
        async with aiosqlite.connect(self.db_path) as db:
            for table_sql in ALL_TABLES:
                await db.execute(table_sql)
            await db.commit()

    async def ensure_rule(self, digest: str, name: str, kind: str, summary: Dict[str, Any] = None):
        """Регистрирует правило если его нет"""
        async with aiosqlite.connect(self.db_path) as db:
            await db.execute("""
                INSERT OR IGNORE INTO rules (digest, name, kind, summary)
                VALUES (?, ?, ?, ?)
            """, (digest, name, kind, json.dumps(summary or {}, ensure_ascii=False)))

            await db.execute("""
                UPDATE rules
                SET last_used = CURRENT_TIMESTAMP
                WHERE digest = ?
            """, (digest,))

            await db.commit()

    # === REPORTS ===

    async def add_report(
        self,
        command: str,
        report: Dict[str, Any],
        exit_code: int,
        rule_digest: Optional[str] = None,
        params: Dict[str, Any] = None,
    ) -> int:
        """Сохраняет отчет команды"""
        async with aiosqlite.connect(self.db_path) as db:
            cursor = await db.execute("""
                INSERT INTO reports (rule_digest, command, params, exit_code, report)
                VALUES (?, ?, ?, ?, ?)
            """, (
                rule_digest,
                command,
                json.dumps(params or {}, ensure_ascii=False, sort_keys=True),
                exit_code,
                json.dumps(report, ensure_ascii=False, sort_keys=True),
            ))
            await db.commit()
            return cursor.lastrowid

    async def get_reports(
        self,
        rule_digest: Optional[str] = None,
        command: Optional[str] = None,
        limit: int = 20,
    ) -> List[Dict[str, Any]]:
        """Последние отчеты, при необходимости по правилу и команде"""
        conditions = []
        params: List[Any] = []
        if rule_digest:
            conditions.append("r.rule_digest = ?")
            params.append(rule_digest)
        if command:
            conditions.append("r.command = ?")
            params.append(command)
        where = f"WHERE {' AND '.join(conditions)}" if conditions else ""
        async with aiosqlite.connect(self.db_path) as db:
            db.row_factory = aiosqlite.Row
            async with db.execute(f"""
                SELECT r.id, r.rule_digest, ru.name AS rule_name, r.command,
                       r.params, r.exit_code, r.report, r.created_at
                FROM reports r
                LEFT JOIN rules ru ON ru.digest = r.rule_digest
                {where}
                ORDER BY r.id DESC
                LIMIT ?
            """, (*params, limit)) as cursor:
                rows = await cursor.fetchall()
                result = []
                for row in rows:
                    item = dict(row)
                    item["params"] = json.loads(item["params"])
                    item["report"] = json.loads(item["report"])
                    result.append(item)
                return result

    async def get_report(self, report_id: int) -> Optional[Dict[str, Any]]:
        """Отчет по id"""
        async with aiosqlite.connect(self.db_path) as db:
            db.row_factory = aiosqlite.Row
            async with db.execute("""
                SELECT id, rule_digest, command, params, exit_code, report, created_at
                FROM reports
                WHERE id = ?
            """, (report_id,)) as cursor:
                row = await cursor.fetchone()
                if row is None:
                    return None
                item = dict(row)
                item["params"] = json.loads(item["params"])
                item["report"] = json.loads(item["report"])
                return item

    async def clear_reports(self, rule_digest: Optional[str] = None) -> int:
        """Удаляет отчеты (все или по правилу)"""
        async with aiosqlite.connect(self.db_path) as db:
            if rule_digest:
                cursor = await db.execute("DELETE FROM reports WHERE rule_digest = ?", (rule_digest,))
            else:
                cursor = await db.execute("DELETE FROM reports")
            await db.commit()
            return cursor.rowcount

    async def get_stats(self) -> Dict[str, Any]:
        """Счетчики по командам"""
        async with aiosqlite.connect(self.db_path) as db:
            async with db.execute("""
                SELECT command, COUNT(*), SUM(CASE WHEN exit_code = 0 THEN 1 ELSE 0 END)
                FROM reports
                GROUP BY command
                ORDER BY command
            """) as cursor:
                rows = await cursor.fetchall()
        return {command: {"total": total, "ok": ok or 0} for command, total, ok in rows}
