import csv
import json
import logging
import os
from collections import defaultdict
from datetime import datetime
from typing import Any, Dict, IO, List, Optional

from src.core.run_spec import SweepSpec
from src.core.trace import Trace
from src.services.simulation_service import SweepRow
from src.services.verification_service import (LowerBoundResult, ScalingFit, failure_rate_nonincreasing,
                                               lower_bound_floor, model_ratios, scaling_fit, MIN_FIT_POINTS)

SUMMARY_SCHEMA_VERSION = '1.0'
RUN_COLUMNS = ['n', 'model', 'seed', 'valid', 'max_energy', 'rounds', 'phases_used']
CAP_COLUMNS = ['n', 'model', 'seed', 'cap', 'valid', 'max_energy', 'capped']

# Growth model the energy of each protocol is expected to follow.
ENERGY_MODELS = {
    'cd': ['log'],
    'beep': ['log'],
    'nocd': ['log2loglog', 'log2'],
    'nocd-naive': ['log2loglog', 'log2'],
}


class ReportGenerator:
    """Service for writing traces, per-run CSV rows and sweep summaries."""

    def __init__(self, output_dir: str):
        self.output_dir = output_dir
        self._files: Dict[str, IO] = {}
        self._writers: Dict[str, csv.DictWriter] = {}

    def path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def write_trace(self, trace: Trace, filename: str) -> str:
        os.makedirs(os.path.dirname(os.path.abspath(filename)), exist_ok=True)
        with open(filename, 'w', encoding='utf-8', newline='\n') as f:
            f.write(trace.to_json())
        logging.info(f"Trace written to {filename}")
        return filename

    def add_row(self, row: SweepRow) -> None:
        """Append a row to runs.csv, or to cap_sweep.csv for capped lower-bound runs; flushed immediately."""
        if row.cap is None:
            self._write('runs.csv', RUN_COLUMNS, row.csv_record())
        else:
            record = {key: getattr(row, key) for key in CAP_COLUMNS}
            self._write('cap_sweep.csv', CAP_COLUMNS, record)

    def _write(self, name: str, columns: List[str], record: Dict[str, Any]) -> None:
        writer = self._writers.get(name)
        if writer is None:
            os.makedirs(self.output_dir, exist_ok=True)
            f = open(self.path(name), 'w', encoding='utf-8', newline='')
            writer = csv.DictWriter(f, fieldnames=columns)
            writer.writeheader()
            self._files[name] = f
            self._writers[name] = writer
        writer.writerow(record)
        self._files[name].flush()

    def close(self) -> None:
        for f in self._files.values():
            f.close()
        self._files.clear()
        self._writers.clear()

    def build_summary(self, sweep: SweepSpec, rows: List[SweepRow], errors: int = 0) -> Dict[str, Any]:
        run_rows = [row for row in rows if row.cap is None]
        cap_rows = [row for row in rows if row.cap is not None]
        model = sweep.run.model

        by_n: Dict[int, List[SweepRow]] = defaultdict(list)
        for row in run_rows:
            by_n[row.n].append(row)

        per_n = {}
        for n, group in sorted(by_n.items()):
            per_n[str(n)] = {
                'runs': len(group),
                'failures': sum(1 for row in group if not row.valid),
                'max_energy': max(row.max_energy for row in group),
                'mean_max_energy': sum(row.max_energy for row in group) / len(group),
                'mean_energy': sum(row.mean_energy for row in group) / len(group),
                'mean_rounds': sum(row.rounds for row in group) / len(group),
            }

        points = [(int(n), stats['mean_max_energy']) for n, stats in per_n.items()]
        fits = {}
        for growth in ENERGY_MODELS[model]:
            fit = self._fit(points, growth)
            fits[growth] = {
                'fit': fit.to_dict() if fit else None,
                'ratios': {str(n): ratio for n, ratio in model_ratios(points, growth).items()} if points else {},
            }

        summary = {
            'schema_version': SUMMARY_SCHEMA_VERSION,
            'generated_on': datetime.now().strftime('%Y-%m-%d %H:%M:%S'),
            'config': sweep.to_dict(),
            'model': model,
            'runs': len(run_rows),
            'failures': sum(1 for row in run_rows if not row.valid),
            'errors': errors,
            'per_n': per_n,
            'fits': fits,
        }
        if cap_rows:
            table = self.cap_table(cap_rows)
            summary['cap_sweep'] = [result.to_dict() for result in table]
            summary['cap_sweep_nonincreasing'] = {
                str(n): failure_rate_nonincreasing([result for result in table if result.n == n])
                for n in sorted({result.n for result in table})
            }
        return summary

    @staticmethod
    def _fit(points, growth: str) -> Optional[ScalingFit]:
        if len({n for n, _ in points}) < MIN_FIT_POINTS:
            logging.info(f"Skipping {growth} fit: fewer than {MIN_FIT_POINTS} distinct n values")
            return None
        return scaling_fit(points, growth)

    @staticmethod
    def cap_table(rows: List[SweepRow]) -> List[LowerBoundResult]:
        grouped: Dict[tuple, List[SweepRow]] = defaultdict(list)
        for row in rows:
            grouped[(row.n, row.cap)].append(row)
        return [
            LowerBoundResult(n, cap, len(group), sum(1 for row in group if not row.valid), lower_bound_floor(n, cap))
            for (n, cap), group in sorted(grouped.items())
        ]

    def write_summary(self, summary: Dict[str, Any], name: str = 'summary.json') -> str:
        os.makedirs(self.output_dir, exist_ok=True)
        filename = self.path(name)
        with open(filename, 'w', encoding='utf-8') as f:
            json.dump(summary, f, indent=2, sort_keys=True)
            f.write('\n')
        logging.info(f"Summary written to {filename}")
        return filename

    @staticmethod
    def format_summary(summary: Dict[str, Any]) -> str:
        """Short human-readable digest printed after a sweep."""
        lines = [f"=== SWEEP SUMMARY ({summary['model']}) ===",
                 f"Runs: {summary['runs']}, invalid: {summary['failures']}, errors: {summary['errors']}"]
        for n, stats in summary['per_n'].items():
            lines.append(f"  n={n}: max energy {stats['max_energy']}, mean rounds {stats['mean_rounds']:.1f}, "
                         f"failures {stats['failures']}/{stats['runs']}")
        for growth, entry in summary['fits'].items():
            fit = entry['fit']
            if fit:
                lines.append(f"  fit {growth}: a={fit['coefficient']:.3f}, R^2={fit['r_squared']:.3f}")
        for result in summary.get('cap_sweep', []):
            lines.append(f"  cap={result['cap']} n={result['n']}: failure rate {result['failure_rate']:.3f} "
                         f"(floor {result['floor']:.3f})")
        return "\n".join(lines)
