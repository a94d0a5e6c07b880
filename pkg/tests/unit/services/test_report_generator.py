import csv
import json
import math
import os

import pytest

from src.core.radio_engine import run_protocol
from src.core.run_spec import RunSpec, SweepSpec
from src.core.topology import generate_path
from src.core.trace import Trace
from src.protocols.cd_mis import CdConfig, CdMisProtocol
from src.services.report_generator import CAP_COLUMNS, RUN_COLUMNS, SUMMARY_SCHEMA_VERSION, ReportGenerator
from src.services.simulation_service import SweepRow


def read_csv(path):
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.DictReader(f))


class TestReportGenerator:
    """Test cases for trace, CSV and summary output."""

    def setup_method(self):
        self.sweep = SweepSpec(RunSpec(model='cd'), n_list=[16, 32, 64, 128], trials=2, family='gnp:{n}:0.1')
        # Max energy exactly 5 log2 n + 1 for every run.
        self.rows = [SweepRow(n, 'cd', seed, True, int(5 * math.log2(n)) + 1, 100, 4, mean_energy=3.0)
                     for n in self.sweep.n_list for seed in range(2)]

    def test_write_trace(self, tmp_path):
        """Test traces are written as JSON that reloads to the same trace."""
        trace = run_protocol(generate_path(4), CdMisProtocol(CdConfig(n=4)), seed=0, graph_ref='path:4')
        filename = str(tmp_path / 'nested' / 'trace.json')
        ReportGenerator(str(tmp_path)).write_trace(trace, filename)
        with open(filename, encoding='utf-8') as f:
            assert Trace.from_json(f.read()) == trace

    def test_rows_are_split_by_kind(self, tmp_path):
        """Test uncapped rows go to runs.csv and capped rows to cap_sweep.csv."""
        reports = ReportGenerator(str(tmp_path))
        reports.add_row(SweepRow(8, 'cd', 0, True, 12, 40, 3))
        reports.add_row(SweepRow(8, 'cd', 1, False, 2, 40, 3, cap=2, capped=8))
        reports.close()

        runs = read_csv(tmp_path / 'runs.csv')
        assert list(runs[0]) == RUN_COLUMNS
        assert runs == [{'n': '8', 'model': 'cd', 'seed': '0', 'valid': 'True', 'max_energy': '12',
                         'rounds': '40', 'phases_used': '3'}]
        capped = read_csv(tmp_path / 'cap_sweep.csv')
        assert list(capped[0]) == CAP_COLUMNS
        assert capped[0]['cap'] == '2'
        assert capped[0]['capped'] == '8'

    def test_rows_are_flushed_immediately(self, tmp_path):
        """Test a row is on disk before the generator is closed."""
        reports = ReportGenerator(str(tmp_path))
        reports.add_row(SweepRow(8, 'cd', 0, True, 12, 40, 3))
        assert len(read_csv(tmp_path / 'runs.csv')) == 1
        reports.close()

    def test_summary_per_n_and_fit(self, tmp_path):
        """Test the summary aggregates per n and fits the logarithmic energy model."""
        summary = ReportGenerator(str(tmp_path)).build_summary(self.sweep, self.rows)
        assert summary['schema_version'] == SUMMARY_SCHEMA_VERSION
        assert summary['runs'] == 8
        assert summary['failures'] == 0
        assert summary['per_n']['64'] == {'runs': 2, 'failures': 0, 'max_energy': 31, 'mean_max_energy': 31.0,
                                          'mean_energy': 3.0, 'mean_rounds': 100.0}
        fit = summary['fits']['log']['fit']
        assert fit['coefficient'] == pytest.approx(5.0)
        assert fit['intercept'] == pytest.approx(1.0)
        assert summary['fits']['log']['ratios']['16'] == pytest.approx(21 / 4)
        assert 'cap_sweep' not in summary

    def test_summary_skips_fit_with_few_sizes(self, tmp_path):
        """Test fewer than four sizes leave the fit empty but keep the ratios."""
        sweep = SweepSpec(RunSpec(model='nocd'), n_list=[16, 32], trials=1)
        rows = [SweepRow(16, 'nocd', 0, True, 100, 10, 1), SweepRow(32, 'nocd', 0, True, 150, 10, 1)]
        summary = ReportGenerator(str(tmp_path)).build_summary(sweep, rows)
        assert set(summary['fits']) == {'log2loglog', 'log2'}
        assert summary['fits']['log2']['fit'] is None
        assert summary['fits']['log2']['ratios']['16'] == pytest.approx(100 / 16)

    def test_summary_cap_sweep(self, tmp_path):
        """Test capped rows become a failure-rate table per (n, cap)."""
        rows = self.rows + [SweepRow(8, 'cd', seed, seed == 0, 1, 10, 1, cap=cap)
                            for cap in (0, 4) for seed in range(2)]
        summary = ReportGenerator(str(tmp_path)).build_summary(self.sweep, rows, errors=1)
        assert summary['runs'] == 8
        assert summary['errors'] == 1
        assert [(entry['n'], entry['cap'], entry['failures']) for entry in summary['cap_sweep']] == [
            (8, 0, 1), (8, 4, 1)]
        assert summary['cap_sweep_nonincreasing'] == {'8': True}

    def test_write_and_format_summary(self, tmp_path):
        """Test the summary is written as JSON and digested for the console."""
        reports = ReportGenerator(str(tmp_path / 'out'))
        summary = reports.build_summary(self.sweep, self.rows)
        filename = reports.write_summary(summary)
        assert os.path.basename(filename) == 'summary.json'
        with open(filename, encoding='utf-8') as f:
            assert json.load(f)['per_n']['16']['runs'] == 2
        digest = reports.format_summary(summary)
        assert digest.startswith("=== SWEEP SUMMARY (cd) ===")
        assert "fit log: a=5.000" in digest
