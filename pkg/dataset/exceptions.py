"""
Exceptions raised by the dataset package
"""

from typing import NamedTuple


class LineIssue(NamedTuple):
    line_number: int
    kind: str
    reason: str

    def __str__(self):
        return f'line {self.line_number}: {self.kind}: {self.reason}'


class DatasetError(Exception):
    """Base class for dataset and result file errors"""


class DatasetNotFoundError(DatasetError, FileNotFoundError):
    """Input file does not exist"""


class DatasetValidationError(DatasetError, ValueError):
    """One or more lines of an input file are malformed or invalid"""

    def __init__(self, path, issues):
        self.path = path
        self.issues = tuple(issues)
        shown = '\n  '.join(str(issue) for issue in self.issues[:20])
        more = f'\n  ... and {len(self.issues) - 20} more' if len(self.issues) > 20 else ''
        super().__init__(f'{path}: {len(self.issues)} bad line(s)\n  {shown}{more}')


class DatasetWriteError(DatasetError, OSError):
    """Output file could not be written"""
