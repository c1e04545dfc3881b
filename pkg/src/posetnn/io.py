import json
import pathlib
from typing import Sequence, TextIO

import pyarrow as pa
import pyarrow.csv as pcsv

from posetnn import serialize
from posetnn.cmd import Format
from posetnn.execute import Report


def render(value: object, fmt: Format) -> str:
    """
    Renders one report value.  JSON keys are sorted and every rendering ends
    with a newline so that repeated runs are byte-identical.
    """
    if fmt == "json":
        return json.dumps(serialize.to_json(value), indent=2, sort_keys=True)
    if fmt == "csv":
        table = serialize.to_table(value)
        sink = pa.BufferOutputStream()
        pcsv.write_csv(table, sink)
        return sink.getvalue().to_pybytes().decode("utf-8").rstrip("\n")
    return serialize.to_text(value)


def _suffix(fmt: Format) -> str:
    return {"text": ".txt", "json": ".json", "csv": ".csv"}[fmt]


class Exporter:
    def export_report(self, name: str, text: str, fmt: Format, /) -> None:
        raise NotImplementedError()


class StreamExporter(Exporter):
    """
    Writes every report to one stream.  Reports after the first are
    preceded by a blank line.
    """

    def __init__(self, stream: TextIO) -> None:
        self.__stream = stream
        self.__count = 0

    def export_report(self, name: str, text: str, fmt: Format, /) -> None:
        if self.__count:
            self.__stream.write("\n")
        self.__stream.write(text + "\n")
        self.__count += 1


class InMemoryExporter(Exporter):
    def __init__(self) -> None:
        self.__reports: dict[str, str] = {}

    def export_report(self, name: str, text: str, fmt: Format, /) -> None:
        assert name not in self.__reports
        self.__reports[name] = text

    def results(self) -> dict[str, str]:
        return dict(self.__reports)


class FileSystemExporter(Exporter):
    def __init__(self, root: pathlib.Path) -> None:
        self.__root = root

    def export_report(self, name: str, text: str, fmt: Format, /) -> None:
        self.__root.mkdir(parents=True, exist_ok=True)
        path = self.__root / f"{name}{_suffix(fmt)}"
        path.write_text(text + "\n", encoding="utf-8")


def emit_report(
    results: Sequence[Report], fmt: Format, exporter: Exporter
) -> None:
    for report in results:
        exporter.export_report(report.name, render(report.value, fmt), fmt)
