"""Shared plumbing for the figure scripts: CSV loading with named-column
validation and the common CLI shape `<script> INPUT.csv -o OUTPUT.png`.

The scripts embed no numerics of their own; every number they draw
comes from the experiment CSVs.
"""
import argparse
import csv


class SchemaError(ValueError):
    pass


def load_csv(path, required_columns):
    """Rows as dicts; raises SchemaError naming any missing column."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in required_columns if c not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing column(s) {', '.join(missing)}; "
                f"found {', '.join(header)}")
        return list(reader)


def wide_columns(path, prefix):
    """Names of the columns starting with prefix, in header order."""
    with open(path, newline="") as fh:
        header = csv.DictReader(fh).fieldnames or []
    return [c for c in header if c.startswith(prefix) and c[len(prefix):].isdigit()]


def standard_parser(description):
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("input", help="input CSV")
    ap.add_argument("-o", "--output", required=True, help="output image path")
    return ap


def floats(rows, column):
    return [float(r[column]) for r in rows]
