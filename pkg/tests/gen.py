"""Seeded random generators for models, records, and expressions.

Used by both the hypothesis property tests and the timed acceptance runs,
so generation is plain random.Random (deterministic under a fixed seed).
"""

from __future__ import annotations

import random
import string

from climadash.dsl.ast import (
    Agg,
    BinOp,
    Datasource,
    Duration,
    Entity,
    Field,
    KpiDef,
    Model,
    Number,
    Target,
)

# words that must not become identifiers (keywords, type names, aggregate
# names, and the in-body reserved modifiers)
RESERVED = {
    "entity", "datasource", "kpi", "unit", "optional", "enum",
    "string", "int", "float", "bool", "datetime",
    "sum", "avg", "min", "max", "first", "last", "count",
    "source", "expr", "window", "target", "baseline", "group_by",
}

UNITS = ["ug/m3", "kWh", "t CO2e", "%", "µg/m³", 'said "ok"', "a\\b", ""]


def ident(rng: random.Random, prefix: str = "") -> str:
    length = rng.randint(1, 8)
    body = "".join(rng.choice(string.ascii_lowercase + "0123456789_")
                   for _ in range(length))
    name = prefix + rng.choice(string.ascii_lowercase) + body
    while name in RESERVED:
        name += rng.choice(string.ascii_lowercase)
    return name


def unique_idents(rng: random.Random, count: int, prefix: str = "") -> list[str]:
    names: list[str] = []
    seen: set[str] = set()
    while len(names) < count:
        name = ident(rng, prefix)
        if name not in seen:
            seen.add(name)
            names.append(name)
    return names


def random_number(rng: random.Random) -> float:
    choice = rng.random()
    if choice < 0.4:
        return float(rng.randint(-1000, 1000))
    if choice < 0.8:
        return round(rng.uniform(-1000, 1000), 3)
    return rng.choice([0.1, 1e-7, 123456.789, 2.5e12, -0.333])


def random_field(rng: random.Random, name: str) -> Field:
    kind = rng.choice(["string", "int", "float", "bool", "datetime", "enum"])
    enum_values: tuple[str, ...] = ()
    if kind == "enum":
        enum_values = tuple(unique_idents(rng, rng.randint(1, 4)))
    unit = rng.choice(UNITS) if rng.random() < 0.3 else None
    return Field(name, kind, enum_values, unit, optional=rng.random() < 0.25)


def random_entity(rng: random.Random, name: str) -> Entity:
    count = rng.randint(1, 6)
    names = unique_idents(rng, count)
    return Entity(name, tuple(random_field(rng, n) for n in names))


def random_expr(rng: random.Random, numeric_fields: list[str],
                depth: int = 0) -> Number | Agg | BinOp:
    roll = rng.random()
    if depth >= 3 or roll < 0.55:
        pick = rng.random()
        if pick < 0.25:
            return Number(abs(random_number(rng)))
        if pick < 0.45 or not numeric_fields:
            return Agg("count", None)
        fn = rng.choice(["sum", "avg", "min", "max", "first", "last"])
        return Agg(fn, rng.choice(numeric_fields))
    op = rng.choice(["+", "-", "*", "/"])
    return BinOp(op,
                 random_expr(rng, numeric_fields, depth + 1),
                 random_expr(rng, numeric_fields, depth + 1))


def random_duration(rng: random.Random) -> Duration:
    return Duration(rng.randint(1, 60), rng.choice("mhdw"))


def random_model(rng: random.Random) -> Model:
    """A structurally valid model: validate_model(result) is empty."""
    n_entities = rng.randint(1, 4)
    entity_names = unique_idents(rng, n_entities, "e")
    entities = tuple(random_entity(rng, n) for n in entity_names)

    n_ds = rng.randint(1, 4)
    ds_names = unique_idents(rng, n_ds, "d")
    datasources = tuple(
        Datasource(name, rng.choice(entities).name) for name in ds_names)

    kpis = []
    by_name = {e.name: e for e in entities}
    for name in unique_idents(rng, rng.randint(0, 4), "k"):
        ds = rng.choice(datasources)
        entity = by_name[ds.entity]
        numeric = [f.name for f in entity.numeric_fields()]
        window = None
        if entity.time_field is not None and rng.random() < 0.7:
            window = random_duration(rng)
        group_by = None
        categories = entity.category_fields()
        if categories and rng.random() < 0.4:
            group_by = rng.choice(categories).name
        target = None
        if rng.random() < 0.5:
            target = Target(rng.choice(["<=", ">=", "<", ">", "=="]),
                            random_number(rng))
        baseline = random_number(rng) if rng.random() < 0.3 else None
        unit = rng.choice(UNITS) if rng.random() < 0.4 else None
        kpis.append(KpiDef(name, source=ds.name,
                           expr=random_expr(rng, numeric), window=window,
                           unit=unit, target=target, baseline=baseline,
                           group_by=group_by))
    return Model(entities, datasources, tuple(kpis))
