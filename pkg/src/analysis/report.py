import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union


def _cell(value: Any) -> str:
    if value is None:
        return "nan"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


@dataclass
class SweepReport:
    """One record per sweep point; serializes to JSON and to tab-separated columns."""

    name: str
    variable: str
    records: List[Dict[str, Any]] = field(default_factory=list)
    meta: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def add(self, **values: Any) -> Dict[str, Any]:
        self.records.append(values)
        return values

    def column(self, name: str) -> List[Any]:
        return [record.get(name) for record in self.records]

    def columns(self) -> List[str]:
        names: List[str] = [self.variable] if any(self.variable in r for r in self.records) else []
        for record in self.records:
            for key in record:
                if key not in names:
                    names.append(key)
        return names

    def to_tsv(self) -> str:
        names = self.columns()
        lines = [f"# {self.name} {json.dumps(self.meta, sort_keys=True)}", "\t".join(names)]
        for record in self.records:
            lines.append("\t".join(_cell(record.get(n)) for n in names))
        return "\n".join(lines) + "\n"

    def to_json(self) -> Dict[str, Any]:
        return {"name": self.name, "variable": self.variable, "meta": self.meta, "records": self.records}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "SweepReport":
        return cls(name=data["name"], variable=data["variable"], records=list(data.get("records", [])), meta=dict(data.get("meta", {})))

    def save(self, directory: Union[str, Path]) -> Tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        json_path = directory / f"{self.name}.json"
        tsv_path = directory / f"{self.name}.tsv"
        json_path.write_text(json.dumps(self.to_json(), indent=2, default=float) + "\n", encoding="utf-8")
        tsv_path.write_text(self.to_tsv(), encoding="utf-8")
        return json_path, tsv_path


def load_report(path: Union[str, Path]) -> SweepReport:
    return SweepReport.from_json(json.loads(Path(path).read_text(encoding="utf-8")))
