"""Converts raw UCI downloads into label-last CSV files.

Usage: convert_uci.py RAW_DIR DEST_DIR
Datasets whose raw files are missing are skipped with a note.
"""

import csv
import os
import sys


def split_rows(path, sep=","):
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("@"):
                continue
            yield [c.strip() for c in (line.split(sep) if sep else line.split())]


def label_last(rows):
    return rows


def label_first(rows):
    return ([*r[1:], r[0]] for r in rows)


def drop_first(rows):
    return (r[1:] for r in rows)


def segmentation_rows(raw, names):
    for name in names:
        # Five header lines precede the data.
        with open(os.path.join(raw, name)) as f:
            lines = f.read().splitlines()[5:]
        for line in lines:
            if line.strip():
                r = line.split(",")
                yield [*r[1:], r[0]]


def vehicle(raw):
    for part in "abcdefghi":
        yield from split_rows(os.path.join(raw, f"vehicle-xa{part}.dat"), sep=None)


def letter(raw):
    # The benchmark uses the first 2000 of the 20000 records.
    rows = label_first(split_rows(os.path.join(raw, "letter.data")))
    for i, r in enumerate(rows):
        if i == 2000:
            break
        yield r


def knowledge(raw):
    import pandas as pd

    path = os.path.join(raw, "knowledge.xls")
    for sheet in ("Training_Data", "Test_Data"):
        frame = pd.read_excel(path, sheet_name=sheet).iloc[:, :6].dropna()
        for row in frame.itertuples(index=False):
            yield [*(repr(float(v)) for v in row[:5]), str(row[5]).strip()]


def from_file(name, transform, sep=","):
    return lambda raw: transform(split_rows(os.path.join(raw, name), sep))


DATASETS = {
    "iris": from_file("iris.data", label_last),
    "wine": from_file("wine.data", label_first),
    "haberman": from_file("haberman.data", label_last),
    "ecoli": from_file("ecoli.data", drop_first, sep=None),
    "cancer": lambda raw: (
        [*r[2:], r[1]] for r in split_rows(os.path.join(raw, "wdbc.data"))
    ),
    "glass": from_file("glass.data", drop_first),
    "sonar": from_file("sonar.data", label_last),
    "libras": from_file("libras.data", label_last),
    "letter": letter,
    "segment": lambda raw: segmentation_rows(raw, ("segmentation.data", "segmentation.test")),
    "segment_train": lambda raw: segmentation_rows(raw, ("segmentation.data",)),
    "pageblocks": from_file("page-blocks.data", label_last, sep=None),
    "vehicle": vehicle,
    "diabetes": from_file("diabetes.data", label_last),
    "knowledge": knowledge,
}


def main(raw, dest):
    for name, rows in DATASETS.items():
        try:
            data = list(rows(raw))
        except FileNotFoundError as e:
            print(f"skip {name}: {e.filename} missing")
            continue
        except ImportError as e:
            print(f"skip {name}: {e}")
            continue
        with open(os.path.join(dest, f"{name}.csv"), "w", newline="") as f:
            csv.writer(f, lineterminator="\n").writerows(data)
        print(f"wrote {name}.csv ({len(data)} rows)")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(sys.argv[1], sys.argv[2])
