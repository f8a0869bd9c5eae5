"""
Report export for hamop.

Renders a Report as stable JSON (the ``--json`` schema documented in
docs/JSON_SCHEMA.md) or as human-readable text.
"""

import json
import logging
from typing import Dict, Any, List

from models.report_model import Report, CheckStatus

logger = logging.getLogger(__name__)

STATUS_MARKS = {
    CheckStatus.PASSED: "PASS",
    CheckStatus.FAILED: "FAIL",
    CheckStatus.ERROR: "ERROR",
    CheckStatus.SKIPPED: "SKIP",
}


class ReportExporter:
    """Handles exporting reports to the supported formats."""

    def __init__(self, report: Report, include_timings: bool = False):
        self.report = report
        self.include_timings = include_timings

    def export_to_json(self) -> str:
        """Sorted-key JSON; identical inputs give identical text."""
        return json.dumps(self.report.to_dict(self.include_timings), indent=2, sort_keys=True,
                          ensure_ascii=False)

    def _format_value(self, value: Any, indent: int) -> List[str]:
        pad = "  " * indent
        if isinstance(value, dict):
            lines = []
            for key in sorted(value):
                item = value[key]
                if isinstance(item, (dict, list)) and item:
                    lines.append(f"{pad}{key}:")
                    lines.extend(self._format_value(item, indent + 1))
                else:
                    lines.append(f"{pad}{key}: {self._scalar(item)}")
            return lines
        if isinstance(value, list):
            if all(not isinstance(v, (dict, list)) for v in value):
                return [f"{pad}{', '.join(self._scalar(v) for v in value)}"]
            lines = []
            for item in value:
                if isinstance(item, list) and all(not isinstance(v, (dict, list)) for v in item):
                    lines.append(f"{pad}[{', '.join(self._scalar(v) for v in item)}]")
                else:
                    lines.append(f"{pad}-")
                    lines.extend(self._format_value(item, indent + 1))
            return lines
        return [f"{pad}{self._scalar(value)}"]

    @staticmethod
    def _scalar(value: Any) -> str:
        if value is None:
            return "-"
        if isinstance(value, bool):
            return "yes" if value else "no"
        return str(value)

    def export_to_text(self) -> str:
        report = self.report
        lines = [f"hamop {report.command}"]
        lines.append("=" * 60)
        if report.inputs:
            lines.extend(self._format_value(report.inputs, 0))
            lines.append("-" * 60)
        for result in report.results:
            header = f"[{STATUS_MARKS[result.status]}] {result.name}"
            if self.include_timings and result.execution_time is not None:
                header += f" ({result.execution_time:.3f}s)"
            lines.append(header)
            if result.witness:
                lines.append(f"  witness: {result.witness}")
            if result.error_message:
                lines.append(f"  error: {result.error_message}")
            if result.details:
                lines.extend(self._format_value(result.details, 1))
        if report.outputs:
            lines.append("-" * 60)
            lines.extend(self._format_value(report.outputs, 0))
        lines.append("=" * 60)
        lines.append("ALL CHECKS PASSED" if report.passed else "SOME CHECKS FAILED")
        return "\n".join(lines)

    def export(self, format: str) -> str:
        """
        Export in the requested format.

        Args:
            format: "json" or "text"
        """
        exporters = {
            'json': self.export_to_json,
            'text': self.export_to_text,
        }
        if format not in exporters:
            raise ValueError(f"Unknown export format: {format}")
        return exporters[format]()

    def get_available_formats(self) -> List[str]:
        return ['json', 'text']


def report_from_json(text: str) -> Report:
    """Inverse of ``export_to_json``."""
    data: Dict[str, Any] = json.loads(text)
    return Report.from_dict(data)
