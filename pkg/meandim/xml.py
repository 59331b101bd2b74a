"""XML utilities for the meandim package."""

import json
from pathlib import Path
from typing import Any

from defusedxml.lxml import parse as parse_xml
from lxml import etree

from .exceptions import ConfigParseError


def location(element) -> tuple[int | None, int | None]:
    """
    Return the line and column of an element; lxml only records the line.

    Args:
        element (ElementBase): The XML element.

    Returns:
        tuple[int | None, int | None]: The line and column.
    """
    return getattr(element, "sourceline", None), None


def parse_error(element, message: str, path: str = "") -> ConfigParseError:
    """
    Build a parse error located at an element.

    Args:
        element (ElementBase): The offending element.
        message (str): What is wrong.
        path (str): The file path.

    Returns:
        ConfigParseError: The error, pointing at the element's line.
    """
    line, column = location(element)
    return ConfigParseError(message, path=path, line=line, column=column or 1)


def read_root(path: str | Path, tag: str):
    """
    Parse an XML file and return its root element.

    Args:
        path (str | Path): The file path.
        tag (str): The expected root tag.

    Returns:
        ElementBase: The root element.

    Raises:
        ConfigParseError: If the file is unreadable, malformed or has another root.
    """
    try:
        root = parse_xml(str(path)).getroot()
    except etree.XMLSyntaxError as error:
        line, column = error.position
        raise ConfigParseError(error.msg, str(path), line, column) from error
    except OSError as error:
        raise ConfigParseError(f"cannot read file: {error.strerror}", str(path)) from error
    if root.tag != tag:
        raise parse_error(root, f"expected <{tag}>, found <{root.tag}>", str(path))
    return root


def get_element_attribute(element, attribute: str, default_value: str = "") -> str:
    """
    Get an attribute from the XML element if it exists, else return default_value.

    Args:
        element (ElementBase): The XML element to parse.
        attribute (str): The attribute to search for.
        default_value (str): The default value to return if the attribute does not
            exist.

    Returns:
        str: The attribute value if it exists, else the default value.
    """
    value = element.get(attribute)
    return value if value is not None else default_value


def get_sub_element_as_str(element, tag: str, default_value: str = "") -> str:
    """
    Get a sub element text from the XML element if tag exists, else return
    default_value.

    Args:
        element (ElementBase): The XML element to parse.
        tag (str): The tag to search for.
        default_value (str): The default value to return if the tag does not exist.

    Returns:
        str: The stripped sub element text if the tag exists, else the default value.
    """
    sub_element = element.find(tag)
    if sub_element is None or sub_element.text is None:
        return default_value
    return sub_element.text.strip()


def get_sub_element_as_json(element, tag: str, default_value: Any = None) -> Any:
    """
    Decode the JSON text of a sub element.

    Args:
        element (ElementBase): The XML element to parse.
        tag (str): The tag to search for.
        default_value (Any): The value returned when the tag does not exist.

    Returns:
        Any: The decoded value.

    Raises:
        ConfigParseError: If the text is not valid JSON.
    """
    sub_element = element.find(tag)
    if sub_element is None:
        return default_value
    return text_as_json(sub_element)


def text_as_json(element) -> Any:
    """Decode the JSON text of an element, reporting the element's line."""
    try:
        return json.loads(element.text or "")
    except json.JSONDecodeError as error:
        line, _ = location(element)
        raise ConfigParseError(
            f"<{element.tag}>: {error.msg}",
            line=(line or 0) + error.lineno - 1 if line else None,
            column=error.colno,
        ) from error


def add_sub_element(parent, tag: str, text: str | None = None, **attributes: Any):
    """
    Append a sub element with optional text and string attributes.

    Args:
        parent (ElementBase): The parent element.
        tag (str): The tag.
        text (str | None): The text.
        **attributes (Any): Attributes, converted with `str`.

    Returns:
        ElementBase: The new element.
    """
    sub_element = etree.SubElement(
        parent, tag, {key: str(value) for key, value in attributes.items()}
    )
    if text is not None:
        sub_element.text = text
    return sub_element


def add_json_sub_element(parent, tag: str, value: Any):
    """Append a sub element whose text is the compact JSON of `value`."""
    return add_sub_element(parent, tag, json.dumps(value, separators=(",", ":")))


def to_string(element) -> str:
    """Serialize an element tree as pretty printed XML."""
    return etree.tostring(element, pretty_print=True, encoding="unicode")
