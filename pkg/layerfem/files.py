"""
Typed output filenames. Every report, mesh or solution file written by layerfem goes through
one of these classes.
"""
import os
import json
from typing import Any, Iterable, TextIO

import pandas as pd
from typing_extensions import Self

from layerfem.config import LAYERFEM_REPORTS_DIR


class Filename(str):
    """
    A class that represents a filename.

    It provides the basename, a local standard path under the reports repository
    and opening of the file. It also inherits all string methods.

    >>> filename = Filename("/tmp/out/study.csv")
    >>> filename.basename
    'study.csv'
    >>> filename.local("rd1d")
    '/home/myuser/.layerfem/reports/rd1d/study.csv'
    """

    @property
    def basename(self) -> Self:
        return self.__class__(os.path.basename(self))

    def local(self, study_name: str) -> Self:
        """
        Creates a local standard path for the file, grouped by study name.
        """
        basedir = os.path.join(LAYERFEM_REPORTS_DIR, study_name)
        os.makedirs(basedir, exist_ok=True)
        return self.__class__(os.path.join(basedir, self.basename))

    def open(self, mode: str = "rt") -> TextIO:
        if "w" in mode or "a" in mode:
            folder = os.path.dirname(self)
            if folder:
                os.makedirs(folder, exist_ok=True)
        return open(self, mode)  # type: ignore[return-value]


class NodesFilename(Filename):
    """
    Plain text node list, one coordinate per line with 17 significant digits.
    """

    def write_nodes(self, nodes: Iterable[float]):
        with self.open("wt") as output:
            for x in nodes:
                print(f"{x:.17g}", file=output)

    def read_nodes(self) -> list[float]:
        with self.open() as f:
            return [float(line) for line in f if line.strip()]


class JsonFilename(Filename):
    def write_json(self, data: Any):
        with self.open("wt") as output:
            print(json.dumps(data, sort_keys=True, indent=2), file=output)

    def read_json(self) -> Any:
        with self.open() as f:
            return json.load(f)


class CsvFilename(Filename):
    def write_frame(self, frame: pd.DataFrame):
        with self.open("wt") as output:
            frame.to_csv(output, index=False, float_format="%.17g", lineterminator="\n")

    def read_frame(self) -> pd.DataFrame:
        return pd.read_csv(self)
