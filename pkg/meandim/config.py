"""Parsing and dumping of the XML configs: groups, subshifts, measures,
covering instances and complete runs."""

import logging
import re
from pathlib import Path
from typing import Any, Callable, TypeVar

from lxml import etree
from pydantic import ValidationError

from .enums import Command, GroupKind, MeasureKind, OutputFormat, SubshiftKind
from .exceptions import ConfigParseError, MeanDimException
from .groups import contains, sphere
from .model import (
    Budget,
    GroupSpec,
    MeasureSpec,
    PatternSpec,
    RunConfig,
    ShapeSpec,
    SubshiftSpec,
    TranslateArray,
    freeze,
)
from .xml import (
    add_json_sub_element,
    add_sub_element,
    get_element_attribute,
    get_sub_element_as_json,
    get_sub_element_as_str,
    parse_error,
    read_root,
    text_as_json,
    to_string,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")

INTERVAL = re.compile(r"^interval:\s*(-?\d+)\s*\.\.\s*(-?\d+)$")
BALL = re.compile(r"^ball:\s*(\d+)$")


def _build(element, path: str, factory: Callable[[], T]) -> T:
    """Run a model constructor, turning validation errors into parse errors."""
    try:
        return factory()
    except ValidationError as error:
        first = error.errors()[0]
        where = ".".join(str(part) for part in first["loc"])
        message = f"<{element.tag}> {where}: {first['msg']}" if where else first["msg"]
        raise parse_error(element, message, path) from error
    except ConfigParseError:
        raise
    except MeanDimException as error:
        raise parse_error(element, error.message, path) from error


def _enum(element, attribute: str, enum: type, path: str, default: str = ""):
    value = get_element_attribute(element, attribute, default)
    try:
        return enum(value)
    except ValueError as error:
        allowed = ", ".join(member.value for member in enum)
        raise parse_error(
            element, f"{attribute}={value!r} is not one of {allowed}", path
        ) from error


def _int(element, attribute: str, default: int, path: str) -> int:
    value = get_element_attribute(element, attribute, str(default))
    try:
        return int(value)
    except ValueError as error:
        raise parse_error(element, f"{attribute}={value!r} is not an integer", path) from error


def _bool(element, attribute: str, path: str) -> bool:
    value = get_element_attribute(element, attribute, "false").lower()
    if value not in ("true", "false"):
        raise parse_error(element, f"{attribute}={value!r} is not true or false", path)
    return value == "true"


def _json(element, tag: str, path: str, default: Any = None) -> Any:
    try:
        return get_sub_element_as_json(element, tag, default)
    except ConfigParseError as error:
        raise ConfigParseError(
            error.message, path, error.details["line"], error.details["column"]
        ) from error


def parse_group(element, path: str = "") -> GroupSpec:
    """
    Parse a `<group>` element.

    Args:
        element (ElementBase): The element.
        path (str): The file path, for error messages.

    Returns:
        GroupSpec: The group.
    """
    kind = _enum(element, "kind", GroupKind, path)
    if kind == GroupKind.DIRECT_PRODUCT:
        factors = element.findall("group")
        if len(factors) != 2:
            raise parse_error(element, "DirectProduct needs two <group> factors", path)
        left, right = (parse_group(factor, path) for factor in factors)
        return _build(element, path, lambda: GroupSpec.product(left, right))
    rank = _int(element, "rank", 1, path)
    modulus = _int(element, "modulus", 2, path)
    generators = _json(element, "generators", path, [])
    return _build(
        element,
        path,
        lambda: GroupSpec(kind=kind, rank=rank, modulus=modulus, generators=generators),
    )


def dump_group(spec: GroupSpec, parent=None):
    """
    Build the `<group>` element of a group.

    Args:
        spec (GroupSpec): The group.
        parent (ElementBase | None): The parent, if any.

    Returns:
        ElementBase: The element.
    """
    attributes: dict[str, Any] = {"kind": spec.kind.value}
    if spec.kind == GroupKind.INTEGER_LATTICE:
        attributes["rank"] = spec.rank
    if spec.kind == GroupKind.CYCLIC_FINITE:
        attributes["modulus"] = spec.modulus
    if parent is None:
        element = etree.Element("group", {k: str(v) for k, v in attributes.items()})
    else:
        element = add_sub_element(parent, "group", **attributes)
    if spec.left is not None and spec.right is not None:
        dump_group(spec.left, element)
        dump_group(spec.right, element)
    if spec.generators:
        add_json_sub_element(element, "generators", spec.generators)
    return element


def parse_shift(element, path: str = "") -> SubshiftSpec:
    """
    Parse a `<shift>` element: `<symbol>` labels, `<forbidden-word>` JSON
    words and `<forbidden-pattern>` JSON lists of [[g1, g2], letter].

    Args:
        element (ElementBase): The element.
        path (str): The file path.

    Returns:
        SubshiftSpec: The subshift.
    """
    kind = _enum(element, "kind", SubshiftKind, path)
    alphabet = tuple((symbol.text or "").strip() for symbol in element.findall("symbol"))
    size = _int(element, "size", 0, path)
    if not alphabet and size:
        alphabet = tuple(str(i) for i in range(size))
    words = [_located_json(word, path) for word in element.findall("forbidden-word")]
    patterns = [
        _build(pattern, path, lambda p=pattern: PatternSpec(letters=_located_json(p, path)))
        for pattern in element.findall("forbidden-pattern")
    ]
    return _build(
        element,
        path,
        lambda: SubshiftSpec(
            kind=kind,
            alphabet=alphabet,
            forbidden_words=words,
            forbidden_patterns=tuple(patterns),
        ),
    )


def _located_json(element, path: str) -> Any:
    try:
        return text_as_json(element)
    except ConfigParseError as error:
        raise ConfigParseError(
            error.message, path, error.details["line"], error.details["column"]
        ) from error


def dump_shift(shift: SubshiftSpec, parent=None):
    """Build the `<shift>` element of a subshift."""
    if parent is None:
        element = etree.Element("shift", kind=shift.kind.value)
    else:
        element = add_sub_element(parent, "shift", kind=shift.kind.value)
    for symbol in shift.alphabet:
        add_sub_element(element, "symbol", symbol)
    for word in shift.forbidden_words:
        add_json_sub_element(element, "forbidden-word", word)
    for pattern in shift.forbidden_patterns:
        add_json_sub_element(element, "forbidden-pattern", pattern.letters)
    return element


def parse_measure(element, path: str = "") -> MeasureSpec:
    """Parse a `<measure>` element with `<weights>` or `<transition>` JSON."""
    kind = _enum(element, "kind", MeasureKind, path)
    return _build(
        element,
        path,
        lambda: MeasureSpec(
            kind=kind,
            weights=_json(element, "weights", path, []),
            transition=_json(element, "transition", path, []),
            stationary=_json(element, "stationary", path, []),
        ),
    )


def dump_measure(measure: MeasureSpec, parent=None):
    """Build the `<measure>` element of a measure."""
    if parent is None:
        element = etree.Element("measure", kind=measure.kind.value)
    else:
        element = add_sub_element(parent, "measure", kind=measure.kind.value)
    if measure.kind == MeasureKind.BERNOULLI:
        add_json_sub_element(element, "weights", measure.weights)
    else:
        add_json_sub_element(element, "transition", measure.transition)
        add_json_sub_element(element, "stationary", measure.stationary)
    return element


def _element_list(element, group: GroupSpec, path: str) -> tuple:
    """Read `interval:a..b`, `ball:r` or a JSON list of elements."""
    text = (element.text or "").strip()
    if match := INTERVAL.match(text):
        if group.kind != GroupKind.INTEGER_LATTICE or group.rank != 1:
            raise parse_error(element, "interval descriptors need the integers", path)
        start, stop = int(match.group(1)), int(match.group(2))
        return tuple((n,) for n in range(start, stop))
    if match := BALL.match(text):
        radius = int(match.group(1))
        return tuple(g for n in range(radius + 1) for g in sphere(group, n))
    values = freeze(_located_json(element, path))
    if not isinstance(values, tuple):
        raise parse_error(element, f"<{element.tag}> must be a list of elements", path)
    for value in values:
        if not contains(group, value):
            raise parse_error(element, f"{value!r} is not an element of {group.label}", path)
    return values


def parse_instance(element, path: str = "") -> TranslateArray:
    """
    Parse an `<instance>` element: a `<group>`, `<ambient>`, optional `<D>`
    and `<level>`s of `<shape>`s with `<elements>` and `<base>`.

    Args:
        element (ElementBase): The element.
        path (str): The file path.

    Returns:
        TranslateArray: The covering instance.
    """
    group_element = element.find("group")
    if group_element is None:
        raise parse_error(element, "<instance> needs a <group>", path)
    group = parse_group(group_element, path)
    ambient_element = element.find("ambient")
    if ambient_element is None:
        raise parse_error(element, "<instance> needs an <ambient> set", path)
    D_element = element.find("D")
    levels = []
    for level in element.findall("level"):
        shapes = []
        for shape in level.findall("shape"):
            parts = [shape.find("elements"), shape.find("base")]
            if any(part is None for part in parts):
                raise parse_error(shape, "<shape> needs <elements> and <base>", path)
            shapes.append(
                ShapeSpec(
                    shape=_element_list(parts[0], group, path),
                    base=_element_list(parts[1], group, path),
                )
            )
        levels.append(tuple(shapes))
    return _build(
        element,
        path,
        lambda: TranslateArray(
            group=group,
            levels=tuple(levels),
            ambient=_element_list(ambient_element, group, path),
            delta=float(get_element_attribute(element, "delta", "0.005")),
            C=float(get_element_attribute(element, "C", "2.0")),
            D=() if D_element is None else _element_list(D_element, group, path),
        ),
    )


def dump_instance(instance: TranslateArray, parent=None):
    """Build the `<instance>` element of a covering instance."""
    attributes = {"delta": repr(instance.delta), "C": repr(instance.C)}
    if parent is None:
        element = etree.Element("instance", attributes)
    else:
        element = add_sub_element(parent, "instance", **attributes)
    dump_group(instance.group, element)
    add_json_sub_element(element, "ambient", instance.ambient)
    if instance.D:
        add_json_sub_element(element, "D", instance.D)
    for level in instance.levels:
        level_element = add_sub_element(element, "level")
        for shape in level:
            shape_element = add_sub_element(level_element, "shape")
            add_json_sub_element(shape_element, "elements", shape.shape)
            add_json_sub_element(shape_element, "base", shape.base)
    return element


BUDGET_LISTS = ("N_list", "M_list", "n_list", "eps_list")
BUDGET_SCALARS = ("n_max", "delta", "window_N", "window_M")


def parse_budget(element, path: str = "") -> Budget:
    """Parse a `<budget>` element; missing entries keep their defaults."""
    values: dict[str, Any] = {}
    for tag in BUDGET_LISTS:
        value = _json(element, tag, path)
        if value is not None:
            values[tag] = value
    for tag in BUDGET_SCALARS:
        text = get_sub_element_as_str(element, tag)
        if text:
            values[tag] = text
    return _build(element, path, lambda: Budget(**values))


def dump_budget(budget: Budget, parent):
    """Append the `<budget>` element of a budget."""
    element = add_sub_element(parent, "budget")
    for tag in BUDGET_LISTS:
        add_json_sub_element(element, tag, getattr(budget, tag))
    for tag in BUDGET_SCALARS:
        add_sub_element(element, tag, repr(getattr(budget, tag)))
    return element


def parse_run(element, path: str = "") -> RunConfig:
    """
    Parse a `<run>` element.

    Args:
        element (ElementBase): The element.
        path (str): The file path.

    Returns:
        RunConfig: The run.
    """
    parts: dict[str, Any] = {}
    parsers: dict[str, Callable] = {
        "group": parse_group,
        "shift": parse_shift,
        "measure": parse_measure,
        "instance": parse_instance,
        "budget": parse_budget,
    }
    for tag, parser in parsers.items():
        child = element.find(tag)
        if child is not None:
            parts[tag] = parser(child, path)
    generate = get_sub_element_as_str(element, "generate")
    output_path = get_element_attribute(element, "output")
    return _build(
        element,
        path,
        lambda: RunConfig(
            command=_enum(element, "command", Command, path),
            seed=_int(element, "seed", 0, path),
            jobs=_int(element, "jobs", 1, path),
            enumerate=_bool(element, "enumerate", path),
            tempered=_bool(element, "tempered", path),
            output_format=_enum(element, "format", OutputFormat, path, "json"),
            output_path=output_path or None,
            generate=generate or None,
            **parts,
        ),
    )


def dump_run(config: RunConfig):
    """
    Build the `<run>` element of a run config.

    Args:
        config (RunConfig): The run.

    Returns:
        ElementBase: The element.
    """
    attributes = {
        "command": config.command.value,
        "seed": str(config.seed),
        "jobs": str(config.jobs),
        "format": config.output_format.value,
        "enumerate": str(config.enumerate).lower(),
        "tempered": str(config.tempered).lower(),
    }
    if config.output_path:
        attributes["output"] = config.output_path
    element = etree.Element("run", attributes)
    if config.group is not None:
        dump_group(config.group, element)
    if config.shift is not None:
        dump_shift(config.shift, element)
    if config.measure is not None:
        dump_measure(config.measure, element)
    if config.instance is not None:
        dump_instance(config.instance, element)
    if config.generate:
        add_sub_element(element, "generate", config.generate)
    dump_budget(config.budget, element)
    return element


def parse_config(path: str | Path) -> RunConfig:
    """
    Parse a run config file.

    Args:
        path (str | Path): The file path.

    Returns:
        RunConfig: The run.

    Raises:
        ConfigParseError: With line and column when the file is malformed.
    """
    logger.debug("Parsing run config %s", path)
    return parse_run(read_root(path, "run"), str(path))


def load_group(path: str | Path) -> GroupSpec:
    """Parse a group config file."""
    return parse_group(read_root(path, "group"), str(path))


def load_shift(path: str | Path) -> SubshiftSpec:
    """Parse a subshift config file."""
    return parse_shift(read_root(path, "shift"), str(path))


def load_measure(path: str | Path) -> MeasureSpec:
    """Parse a measure config file."""
    return parse_measure(read_root(path, "measure"), str(path))


def load_instance(path: str | Path) -> TranslateArray:
    """Parse a covering instance file."""
    return parse_instance(read_root(path, "instance"), str(path))


def dumps(config: RunConfig) -> str:
    """Serialize a run config as XML text."""
    return to_string(dump_run(config))
