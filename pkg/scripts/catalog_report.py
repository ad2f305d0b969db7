"""Print every catalog presentation with its checks and worked products."""

import argparse
from dataclasses import dataclass

from eqsurf.classes import CATALOG, normalize, product, render_normal
from eqsurf.verification import check_catalog


@dataclass
class ReportConfig:
    keys: tuple = tuple(sorted(CATALOG))
    show_classes: bool = True


def report(cfg: ReportConfig) -> str:
    lines = []
    for key in cfg.keys:
        pres = CATALOG[key]
        lines.append(f"== {key}")
        lines.append(pres.text())
        lines.append(check_catalog(key).summary())
        if cfg.show_classes:
            for c, poly in pres.classes:
                lines.append(f"  {c.label()} = {poly}")
        cls = pres.class_map()
        for y, z, w in pres.intersections:
            val = normalize(product(cls[y], cls[z], cls[w] if w else None), pres)
            target = f"[{w}]" if w else "empty"
            lines.append(f"  [{y}][{z}] (meet: {target}) = {render_normal(val, pres)}")
    return "\n".join(lines)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("keys", nargs="*", help="catalog keys (default: all)")
    ap.add_argument("--no-classes", action="store_true")
    a = ap.parse_args()
    print(report(ReportConfig(tuple(a.keys) or tuple(sorted(CATALOG)), not a.no_classes)))
