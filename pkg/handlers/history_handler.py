"""
Команда history: последние сохраненные отчеты
"""
import logging
from argparse import Namespace

from database import Database

from .base_handler import CommandResult, envelope


logger = logging.getLogger(__name__)


class HistoryHandler:
    def __init__(self, db: Database):
        self.db = db

    async def history_command(self, args: Namespace) -> CommandResult:
        """history [--command c] [--limit n] [--stats]"""
        await self.db.init_db()
        if args.stats:
            return CommandResult(envelope("history", None, {"stats": await self.db.get_stats()}))
        rows = await self.db.get_reports(rule_digest=args.digest, command=args.filter, limit=args.limit)
        entries = [
            {
                "id": row["id"],
                "rule": row["rule_name"],
                "digest": row["rule_digest"],
                "command": row["command"],
                "exit_code": row["exit_code"],
                "created_at": row["created_at"],
            }
            for row in rows
        ]
        return CommandResult(envelope("history", None, {"reports": entries}))
