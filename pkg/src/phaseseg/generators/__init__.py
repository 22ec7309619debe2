"""Report and ribbon generators."""

from .report_generator import PALETTE, ReportGenerator, phase_color

__all__ = ["PALETTE", "ReportGenerator", "phase_color"]
