# depth_ruin/tests/test_main.py
"""
Tests for the command-line entry point
"""

import io
import json
import os

import pytest

from config.settings import Settings
from main import format_value, main, write_rows
from pipeline.orchestrator import COMPUTE_COLUMNS, SIMULATE_COLUMNS

TEST_CONFIG = os.path.join(os.path.dirname(__file__), '..', 'config', 'test_config.ini')


class TestOutputFormatting:
    """CSV and JSON writers"""

    def test_float_round_trip_precision(self):
        """Floats keep 17 significant digits"""
        assert format_value(0.1) == '0.10000000000000001'
        assert format_value(True) == 'true'
        assert format_value(3) == '3'
        assert format_value('') == ''

    def test_csv_header_and_rows(self):
        """Fixed header, missing cells left blank"""
        stream = io.StringIO()
        write_rows([{'x': 0.5, 'status': 'ok'}], ['x', 'value', 'status'], stream)

        assert stream.getvalue() == 'x,value,status\n0.5,,ok\n'

    def test_json_lines(self):
        """One JSON object per row"""
        stream = io.StringIO()
        write_rows([{'x': 0.5, 'status': 'ok'}], ['x', 'status'], stream, as_json=True)

        assert json.loads(stream.getvalue()) == {'x': 0.5, 'status': 'ok'}


class TestMain:
    """End-to-end CLI runs on the smoke configuration"""

    @pytest.fixture(autouse=True)
    def workspace(self, tmp_path, monkeypatch):
        """Run inside a temporary directory with a copy of the smoke config"""
        monkeypatch.chdir(tmp_path)
        self.tmp_path = tmp_path
        self.config = str(tmp_path / "config.ini")
        Settings(TEST_CONFIG).save(self.config)

    def edit_config(self, section, key, value):
        settings = Settings(self.config)
        settings.set(section, key, value)
        settings.save(self.config)

    def read(self, name):
        with open(self.tmp_path / name, encoding='utf-8') as f:
            return f.read()

    def test_print_config(self, capsys):
        """--print-config writes the defaulted INI to stdout"""
        assert main(['--print-config', '--config', self.config]) == 0

        out = capsys.readouterr().out
        assert '[MODEL]' in out
        assert 'n_paths = 4000' in out

    def test_print_config_to_file(self):
        """--print-config --out saves a loadable file"""
        assert main(['--print-config', '--config', self.config, '--out', 'full.ini']) == 0

        assert Settings(str(self.tmp_path / 'full.ini')).getint('SIMULATION', 'n_paths') == 4000

    def test_compute(self):
        """compute writes the fixed CSV header and one row per query"""
        assert main(['compute', '--config', self.config, '--out', 'compute.csv']) == 0

        lines = self.read('compute.csv').splitlines()
        assert lines[0] == ','.join(COMPUTE_COLUMNS)
        assert len(lines) == 3
        assert lines[1].startswith('0,0.050000000000000003,3,')

    def test_simulate_is_reproducible(self):
        """Same seed, byte-identical output regardless of worker count"""
        assert main(['simulate', '--config', self.config, '--out', 'one.csv', '--workers', '1']) == 0
        assert main(['simulate', '--config', self.config, '--out', 'two.csv', '--workers', '2']) == 0

        assert self.read('one.csv') == self.read('two.csv')
        assert self.read('one.csv').splitlines()[0] == ','.join(SIMULATE_COLUMNS)

    def test_seed_override(self):
        """--seed changes the simulated sample"""
        assert main(['simulate', '--config', self.config, '--out', 'a.csv']) == 0
        assert main(['simulate', '--config', self.config, '--out', 'b.csv', '--seed', '99']) == 0

        assert self.read('a.csv') != self.read('b.csv')

    def test_json_output(self):
        """--json emits one object per query"""
        assert main(['compute', '--config', self.config, '--out', 'compute.jsonl', '--json']) == 0

        rows = [json.loads(line) for line in self.read('compute.jsonl').splitlines()]
        assert [row['x'] for row in rows] == [0.0, 1.0]
        assert all(row['status'] == 'ok' for row in rows)

    def test_invalid_config_exit_code(self):
        """Validation errors exit with 2"""
        self.edit_config('MODEL', 'kind', 'levy_flight')

        assert main(['compute', '--config', self.config]) == 2

    def test_invalid_tolerances_exit_code(self):
        """A non-positive z_max or quadrature tolerance is a validation error"""
        assert main(['compare', '--config', self.config, '--z-max', '0']) == 2

        self.edit_config('NUMERICS', 'rel_tol', '-1')
        assert main(['compute', '--config', self.config]) == 2

    def test_numerical_error_exit_code(self):
        """Numerical errors exit with 4"""
        self.edit_config('QUERY', 'q', '-1.0')

        assert main(['compute', '--config', self.config, '--out', 'bad.csv']) == 4

    def test_comparison_failure_exit_code(self):
        """A failed comparison exits with 3 after writing its rows"""
        self.edit_config('COMPARE', 'b_offset', '-2.99')
        self.edit_config('QUERY', 'x', '0.0')

        assert main(['compare', '--config', self.config, '--out', 'compare.csv']) == 3
        assert len(self.read('compare.csv').splitlines()) == 2

    def test_command_required(self):
        """Without a command or --print-config argparse exits"""
        with pytest.raises(SystemExit):
            main(['--config', self.config])
