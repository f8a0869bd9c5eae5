"""
Report and catalog models for hamop.

Verdicts returned by the individual checks, the per-check results and the
machine-readable Report assembled by the pipeline and the CLI, and the
catalog entry record.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Any


class CheckStatus(Enum):
    PASSED = "passed"
    FAILED = "failed"
    ERROR = "error"
    SKIPPED = "skipped"


class EntryKind(Enum):
    METRIC = "metric"
    SUBSPACE = "subspace"
    SYSTEM = "system"


@dataclass
class Verdict:
    """Outcome of a single exact check; ``witness`` holds a nonzero residual on failure."""

    passed: bool
    witness: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> Dict[str, Any]:
        return {
            'passed': self.passed,
            'witness': self.witness,
            'details': self.details,
        }


@dataclass
class CheckResult:
    """Model representing one named check inside a Report."""

    name: str
    status: CheckStatus
    witness: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)
    error_message: Optional[str] = None
    execution_time: Optional[float] = None

    @classmethod
    def from_verdict(cls, name: str, verdict: Verdict) -> 'CheckResult':
        status = CheckStatus.PASSED if verdict.passed else CheckStatus.FAILED
        return cls(name=name, status=status, witness=verdict.witness, details=dict(verdict.details))

    @property
    def passed(self) -> bool:
        return self.status in (CheckStatus.PASSED, CheckStatus.SKIPPED)

    def to_dict(self, include_timings: bool = False) -> Dict[str, Any]:
        data = {
            'name': self.name,
            'status': self.status.value,
            'witness': self.witness,
            'details': self.details,
            'error_message': self.error_message,
        }
        if include_timings:
            data['execution_time'] = self.execution_time
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CheckResult':
        return cls(
            name=data['name'],
            status=CheckStatus(data['status']),
            witness=data.get('witness'),
            details=data.get('details', {}),
            error_message=data.get('error_message'),
            execution_time=data.get('execution_time'),
        )


@dataclass
class Report:
    """Machine-readable result of a CLI command or pipeline run."""

    command: str
    inputs: Dict[str, Any] = field(default_factory=dict)
    results: List[CheckResult] = field(default_factory=list)
    outputs: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def has_errors(self) -> bool:
        return any(r.status == CheckStatus.ERROR for r in self.results)

    def add(self, result: CheckResult):
        self.results.append(result)

    def result(self, name: str) -> Optional[CheckResult]:
        return next((r for r in self.results if r.name == name), None)

    def to_dict(self, include_timings: bool = False) -> Dict[str, Any]:
        return {
            'command': self.command,
            'inputs': self.inputs,
            'passed': self.passed,
            'results': [r.to_dict(include_timings) for r in self.results],
            'outputs': self.outputs,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Report':
        return cls(
            command=data['command'],
            inputs=data.get('inputs', {}),
            results=[CheckResult.from_dict(r) for r in data.get('results', [])],
            outputs=data.get('outputs', {}),
        )


@dataclass
class CatalogEntry:
    """Model representing one catalogued object (metric, subspace or hydrodynamic system)."""

    id: str
    kind: EntryKind
    payload: Dict[str, Any]
    provenance: str = ""
    description: str = ""
    expected: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'kind': self.kind.value,
            'provenance': self.provenance,
            'description': self.description,
            'payload': self.payload,
            'expected': self.expected,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CatalogEntry':
        return cls(
            id=data['id'],
            kind=EntryKind(data['kind']),
            payload=data['payload'],
            provenance=data.get('provenance', ''),
            description=data.get('description', ''),
            expected=data.get('expected', {}),
        )
