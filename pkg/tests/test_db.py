from __future__ import annotations

import sys
import tempfile
import unittest
from pathlib import Path
from unittest import mock

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_PATH = PROJECT_ROOT / "src"
if str(SRC_PATH) not in sys.path:
    sys.path.insert(0, str(SRC_PATH))

from swarmlab import db  # noqa: E402


def _runs(count: int) -> list[dict]:
    return [
        {
            "function": "sphere",
            "algorithm": "IGA",
            "run_index": k,
            "seed": 2**63 + k,
            "final_value": 0.5 / (k + 1),
            "evaluations": 155050,
        }
        for k in range(count)
    ]


class HistoryTestCase(unittest.TestCase):
    def setUp(self) -> None:
        self._tmp = tempfile.TemporaryDirectory()
        self.db_path = Path(self._tmp.name) / "history.db"
        patcher = mock.patch.object(db, "get_db_path", return_value=self.db_path)
        patcher.start()
        self.addCleanup(patcher.stop)
        self.sections = {"history": {"enabled": True, "max_experiments": 200}}
        section_patcher = mock.patch.object(
            db.swarmlab_config, "get_section", side_effect=lambda name: self.sections[name]
        )
        section_patcher.start()
        self.addCleanup(section_patcher.stop)

    def tearDown(self) -> None:
        db.shutdown_db()
        self._tmp.cleanup()

    def test_shutdown_db_closes_open_connection(self) -> None:
        db.initialize()
        self.assertFalse(db.db.is_closed())
        db.shutdown_db()
        self.assertTrue(db.db.is_closed())

    def test_record_and_read_back(self) -> None:
        experiment_id = db.record_experiment("bench", "quick", 7, "results/quick", _runs(3))
        self.assertIsNotNone(experiment_id)
        self.assertTrue(db.db.is_closed())

        recent = db.get_recent_experiments(5)
        self.assertEqual(len(recent), 1)
        self.assertEqual(recent[0]["kind"], "bench")
        self.assertEqual(recent[0]["master_seed"], "7")
        self.assertEqual(recent[0]["runs"], 3)

        runs = db.get_experiment_runs(experiment_id)
        self.assertEqual([r["run_index"] for r in runs], [0, 1, 2])
        # u64 seeds survive as text.
        self.assertEqual(runs[0]["seed"], str(2**63))
        self.assertAlmostEqual(runs[1]["final_value"], 0.25)

    def test_recent_experiments_newest_first(self) -> None:
        first = db.record_experiment("bench", "a", 0, "out/a")
        second = db.record_experiment("attack", "label3", 1, "out/b")
        ids = [e["id"] for e in db.get_recent_experiments(10)]
        self.assertEqual(ids, [second, first])

    def test_prune_keeps_newest(self) -> None:
        self.sections["history"]["max_experiments"] = 2
        ids = [db.record_experiment("bench", f"run{k}", k, "out", _runs(1)) for k in range(4)]
        recent = db.get_recent_experiments(10)
        self.assertEqual([e["id"] for e in recent], [ids[3], ids[2]])
        self.assertEqual(db.get_experiment_runs(ids[0]), [])

    def test_disabled_history_records_nothing(self) -> None:
        self.sections["history"]["enabled"] = False
        self.assertIsNone(db.record_experiment("bench", "quick", 0, "out"))
        self.assertFalse(self.db_path.exists())

    def test_broken_ledger_only_warns(self) -> None:
        with mock.patch.object(db, "initialize", side_effect=OSError("disk full")), mock.patch.object(
            db, "print_warning"
        ) as warn:
            self.assertIsNone(db.record_experiment("bench", "quick", 0, "out"))
        warn.assert_called_once()


if __name__ == "__main__":
    unittest.main()
