"""Regenerate the JSON fixtures in fixtures/."""
import json
from pathlib import Path

from cliffko.cech import cocycle_to_json, global_cocycle, suspension_cocycle, suspension_concordance
from cliffko.indexsim import crossing_family, six_dim_family
from cliffko.superconn import suspension

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def write(name: str, data: dict):
    path = OUT / name
    path.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    print(path)


def main():
    OUT.mkdir(exist_ok=True)
    write("suspension_cocycle.json", cocycle_to_json(suspension_cocycle(1)))
    write("single_patch_cocycle.json", cocycle_to_json(global_cocycle(suspension(1))))
    write("suspension_concordance.json", cocycle_to_json(suspension_concordance()))
    fam = crossing_family().to_json()
    write("crossing_family.json", {**fam, "lambdas": ["1/2", "2"], "compare": ["1"]})
    fam = six_dim_family().to_json()
    write("six_dim_family.json", {**fam, "lambdas": ["1/4", "1", "9/4"], "compare": ["1/4", "9/4", "4"]})


if __name__ == "__main__":
    main()
