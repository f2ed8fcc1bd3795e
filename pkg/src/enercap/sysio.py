"""Load and save system instances as a directory of CSV tables plus a manifest.

Layout::

    manifest.json       horizon, interest rate, defaults, profile metadata
    carriers.csv        id,kind,resolution_hours
    regions.csv         id,level,parent,population,gdp,urban_km2,suburban_km2,
                        agricultural_km2,forested_km2
    technologies.csv    id,kind,output_carrier,input_carrier,... (see _TECH_COLUMNS)
    lines.csv           id,carrier,from,to,length_km,existing_capacity,derating,
                        expandable,losses
    demands.csv         carrier,region,annual_energy_twh,profile_id,
                        flexibility_block_hours
    profiles.csv        one column per profile id, one row per timestep

Region->value maps (potentials, existing capacities) are encoded in a single
cell as ``region=value`` pairs joined by ``;``.  Unknown columns or manifest
keys are rejected.  Saving is canonical: re-saving a loaded system emits
byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

from .pipeline import Profile
from .system import (
    Carrier,
    DemandSpec,
    EnergySystem,
    Region,
    SystemConfig,
    Technology,
    TransmissionLine,
)

_CARRIER_COLUMNS = ["id", "kind", "resolution_hours"]
_REGION_COLUMNS = ["id", "level", "parent", "population", "gdp",
                   "urban_km2", "suburban_km2", "agricultural_km2", "forested_km2"]
_LAND_KEYS = ["urban", "suburban", "agricultural", "forested"]
_TECH_COLUMNS = ["id", "kind", "output_carrier", "input_carrier",
                 "overnight_cost_power", "overnight_cost_energy", "fixed_om",
                 "variable_om", "lifetime", "efficiency", "availability_profile_id",
                 "offshore", "potential", "existing", "existing_energy"]
_LINE_COLUMNS = ["id", "carrier", "from", "to", "length_km", "existing_capacity",
                 "derating", "expandable", "losses"]
_DEMAND_COLUMNS = ["carrier", "region", "annual_energy_twh", "profile_id",
                   "flexibility_block_hours"]
_MANIFEST_KEYS = {"horizon_hours", "interest_rate", "defaults", "profiles"}
_DEFAULT_KEYS = {"grid_unit_cost", "grid_lifetime", "h2_pipeline_cost_factor",
                 "slice_peak_multiple", "eff_demand_factor"}


class SystemFormatError(ValueError):
    pass


def _read_table(path: Path, columns: list[str]) -> list[dict[str, str]]:
    if not path.exists():
        raise SystemFormatError(f"missing table {path.name}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        unknown = [c for c in header if c not in columns]
        if unknown:
            raise SystemFormatError(f"{path.name}: unknown columns {unknown}")
        missing = [c for c in columns if c not in header]
        if missing:
            raise SystemFormatError(f"{path.name}: missing columns {missing}")
        return list(reader)


def _parse_map(cell: str, context: str) -> dict[str, float]:
    out: dict[str, float] = {}
    if not cell:
        return out
    for pair in cell.split(";"):
        key, sep, value = pair.partition("=")
        if not sep:
            raise SystemFormatError(f"{context}: expected region=value, got {pair!r}")
        out[key.strip()] = float(value)
    return out


def _format_map(mapping: dict[str, float]) -> str:
    return ";".join(f"{k}={v!r}" for k, v in mapping.items())


def _parse_bool(cell: str, context: str) -> bool:
    if cell in ("true", "True", "1"):
        return True
    if cell in ("false", "False", "0", ""):
        return False
    raise SystemFormatError(f"{context}: expected a boolean, got {cell!r}")


def load_system(directory: str | Path) -> EnergySystem:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise SystemFormatError("missing manifest.json")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    unknown = set(manifest) - _MANIFEST_KEYS
    if unknown:
        raise SystemFormatError(f"manifest.json: unknown keys {sorted(unknown)}")
    defaults = manifest.get("defaults", {})
    unknown = set(defaults) - _DEFAULT_KEYS
    if unknown:
        raise SystemFormatError(f"manifest.json defaults: unknown keys {sorted(unknown)}")
    config = SystemConfig(**defaults)

    carriers = tuple(
        Carrier(row["id"], row["kind"], int(row["resolution_hours"]))
        for row in _read_table(directory / "carriers.csv", _CARRIER_COLUMNS)
    )
    regions = tuple(
        Region(
            id=row["id"],
            level=row["level"],
            parent=row["parent"] or None,
            population=float(row["population"]),
            gdp=float(row["gdp"]),
            land_shares={k: float(row[f"{k}_km2"]) for k in _LAND_KEYS},
        )
        for row in _read_table(directory / "regions.csv", _REGION_COLUMNS)
    )
    technologies = []
    for row in _read_table(directory / "technologies.csv", _TECH_COLUMNS):
        ctx = f"technologies.csv {row['id']}"
        technologies.append(Technology(
            id=row["id"],
            kind=row["kind"],
            output_carrier=row["output_carrier"],
            input_carrier=row["input_carrier"] or None,
            overnight_cost_power=float(row["overnight_cost_power"]),
            overnight_cost_energy=float(row["overnight_cost_energy"]),
            fixed_om=float(row["fixed_om"]),
            variable_om=float(row["variable_om"]),
            lifetime=float(row["lifetime"]),
            efficiency=float(row["efficiency"]),
            availability_profile_id=row["availability_profile_id"] or None,
            offshore=_parse_bool(row["offshore"], ctx),
            potential=_parse_map(row["potential"], ctx) if row["potential"] else None,
            existing_capacity=_parse_map(row["existing"], ctx),
            existing_energy_capacity=_parse_map(row["existing_energy"], ctx),
        ))
    lines = tuple(
        TransmissionLine(
            id=row["id"],
            carrier=row["carrier"],
            from_region=row["from"],
            to_region=row["to"],
            length_km=float(row["length_km"]),
            existing_capacity=float(row["existing_capacity"]),
            derating=float(row["derating"]),
            expandable=_parse_bool(row["expandable"], f"lines.csv {row['id']}"),
            losses=float(row["losses"]),
        )
        for row in _read_table(directory / "lines.csv", _LINE_COLUMNS)
    )
    demands = tuple(
        DemandSpec(
            carrier=row["carrier"],
            region=row["region"],
            annual_energy=float(row["annual_energy_twh"]),
            profile_id=row["profile_id"],
            flexibility_block_hours=int(row["flexibility_block_hours"]),
        )
        for row in _read_table(directory / "demands.csv", _DEMAND_COLUMNS)
    )

    profiles: dict[str, Profile] = {}
    prof_meta = manifest.get("profiles", {})
    if prof_meta:
        file_name = prof_meta.get("file", "profiles.csv")
        norms = prof_meta.get("normalization", {})
        path = directory / file_name
        if not path.exists():
            raise SystemFormatError(f"missing profile table {file_name}")
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header:
                raise SystemFormatError(f"{file_name}: empty")
            columns: list[list[float]] = [[] for _ in header]
            for row in reader:
                if len(row) != len(header):
                    raise SystemFormatError(f"{file_name}: ragged row {row}")
                for j, cell in enumerate(row):
                    columns[j].append(float(cell))
        for name, values in zip(header, columns):
            norm = norms.get(name)
            if norm is None:
                raise SystemFormatError(f"manifest.json: profile {name!r} has no normalization")
            profiles[name] = Profile(name, tuple(values), norm)

    return EnergySystem(
        carriers=carriers,
        regions=regions,
        technologies=tuple(technologies),
        lines=lines,
        demands=demands,
        horizon_hours=int(manifest["horizon_hours"]),
        interest_rate=float(manifest["interest_rate"]),
        profiles=profiles,
        config=config,
    )


def save_system(system: EnergySystem, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    manifest = {
        "horizon_hours": system.horizon_hours,
        "interest_rate": system.interest_rate,
        "defaults": {
            "grid_unit_cost": system.config.grid_unit_cost,
            "grid_lifetime": system.config.grid_lifetime,
            "h2_pipeline_cost_factor": system.config.h2_pipeline_cost_factor,
            "slice_peak_multiple": system.config.slice_peak_multiple,
            "eff_demand_factor": system.config.eff_demand_factor,
        },
    }
    if system.profiles:
        manifest["profiles"] = {
            "file": "profiles.csv",
            "normalization": {pid: p.normalization for pid, p in sorted(system.profiles.items())},
        }
    (directory / "manifest.json").write_text(
        json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )

    def write(name: str, header: list[str], rows: list[list[str]]) -> None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        (directory / name).write_text(buf.getvalue(), encoding="utf-8")

    write("carriers.csv", _CARRIER_COLUMNS,
          [[c.id, c.kind, str(c.resolution_hours)] for c in system.carriers])
    write("regions.csv", _REGION_COLUMNS, [
        [r.id, r.level, r.parent or "", repr(r.population), repr(r.gdp)]
        + [repr(float(r.land_shares.get(k, 0.0))) for k in _LAND_KEYS]
        for r in system.regions
    ])
    write("technologies.csv", _TECH_COLUMNS, [
        [
            t.id, t.kind, t.output_carrier, t.input_carrier or "",
            repr(t.overnight_cost_power), repr(t.overnight_cost_energy),
            repr(t.fixed_om), repr(t.variable_om), repr(t.lifetime),
            repr(t.efficiency), t.availability_profile_id or "",
            "true" if t.offshore else "false",
            _format_map(t.potential) if t.potential is not None else "",
            _format_map(t.existing_capacity),
            _format_map(t.existing_energy_capacity),
        ]
        for t in system.technologies
    ])
    write("lines.csv", _LINE_COLUMNS, [
        [l.id, l.carrier, l.from_region, l.to_region, repr(l.length_km),
         repr(l.existing_capacity), repr(l.derating),
         "true" if l.expandable else "false", repr(l.losses)]
        for l in system.lines
    ])
    write("demands.csv", _DEMAND_COLUMNS, [
        [d.carrier, d.region, repr(d.annual_energy), d.profile_id,
         str(d.flexibility_block_hours)]
        for d in system.demands
    ])
    if system.profiles:
        ids = sorted(system.profiles)
        lengths = {len(system.profiles[pid].values) for pid in ids}
        if len(lengths) != 1:
            raise SystemFormatError("profiles must share one length to serialize")
        rows = [[repr(system.profiles[pid].values[t]) for pid in ids]
                for t in range(lengths.pop())]
        write("profiles.csv", ids, rows)
