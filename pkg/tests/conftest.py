import json
import math

import pytest

from sandroll.geometry import SEGMENT_LENGTH


@pytest.fixture
def parallelogon_gait_file(tmp_path):
    """Single-keyframe gait holding P(60 deg, 150 deg), switching at phase 0."""
    a, z = math.pi / 3.0, 5.0 * math.pi / 6.0
    doc = {
        "name": "parallelogon",
        "stride_period_s": 3.0,
        "segment_length_m": SEGMENT_LENGTH,
        "keyframes": [{"phase": 0.0, "interior_angles_rad": [a, z, 2 * math.pi - a - z] * 2}],
        "switching_phases": [0.0],
    }
    path = tmp_path / "parallelogon.json"
    path.write_text(json.dumps(doc))
    return path


_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def report(request):
    """Record and print one acceptance line, then assert it passed."""
    lines = request.config.stash[_ACCEPTANCE]

    def _report(criterion, ok, detail):
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return _report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
