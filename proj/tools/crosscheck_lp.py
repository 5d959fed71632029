#!/usr/bin/env python3
# Copyright 2026 The freqsec Authors
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Re-solves exported LP files with HiGHS and compares objectives.

Reads <dir>/manifest.csv (file,objective) as written by the acceptance
binary and exits nonzero when any objective differs by more than 1e-6
(relative to max(1, |objective|)).
"""

import argparse
import csv
import pathlib
import sys

import highspy


def solve(path: pathlib.Path, time_limit: float) -> tuple[str, float]:
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", time_limit)
    h.setOptionValue("mip_rel_gap", 0.0)
    h.readModel(str(path))
    h.run()
    return h.modelStatusToString(h.getModelStatus()), h.getInfo().objective_function_value


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("dir", type=pathlib.Path)
    parser.add_argument("--time-limit", type=float, default=600.0)
    args = parser.parse_args()

    failures = 0
    with open(args.dir / "manifest.csv", newline="") as f:
        for row in csv.DictReader(f):
            ours = float(row["objective"])
            status, theirs = solve(args.dir / row["file"], args.time_limit)
            diff = abs(theirs - ours) / max(1.0, abs(ours))
            ok = status == "Optimal" and diff <= 1e-6
            failures += not ok
            print(f"{'PASS' if ok else 'FAIL'} {row['file']}: ours {ours:.10g} highs {theirs:.10g} "
                  f"({status}, rel diff {diff:.2e})")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
