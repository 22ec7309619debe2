"""Tests for the build manifests."""

import re
from pathlib import Path

import phaseseg

ROOT = Path(__file__).resolve().parents[2]


def requirement_sections():
    sections, current = {}, None
    for line in (ROOT / "requirements.txt").read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line.startswith("#"):
            current = line.lstrip("# ").lower()
        elif line:
            sections.setdefault(current, []).append(re.split(r"[=<>~!]", line)[0])
    return sections


class TestManifests:
    """requirements.txt and pyproject.toml agree with the package."""

    def test_lxml_is_a_test_dependency(self):
        sections = requirement_sections()
        runtime = [name for key, names in sections.items() if key not in ("testing", "code quality") for name in names]
        assert "lxml" in sections["testing"]
        assert "lxml" not in runtime
        assert "numpy" in runtime

    def test_pyproject_runtime_dependencies_exclude_lxml(self):
        text = (ROOT / "pyproject.toml").read_text(encoding="utf-8")
        runtime = re.search(r"^dependencies = \[(.*?)\]", text, re.M | re.S).group(1)
        assert "lxml" not in runtime
        assert '"lxml>=4.9.3"' in text

    def test_version_matches_pyproject(self):
        text = (ROOT / "pyproject.toml").read_text(encoding="utf-8")
        assert f'version = "{phaseseg.__version__}"' in text
