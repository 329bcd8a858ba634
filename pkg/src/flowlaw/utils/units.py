"""
Unit handling for FlowLaw configuration values
"""

from typing import Union

import pint

from ..core.errors import ConfigError

# Initialize unit registry
ureg = pint.UnitRegistry()

Quantityish = Union[int, float, str]


def to_magnitude(value: Quantityish, unit: str) -> float:
    """
    Convert a configuration value to a plain number in `unit`

    Strings are parsed by pint ("2000 s", "24 h", "4 Mbit", "0.1 / s",
    "0.01 Mbit**2"); bare numbers are taken to be in `unit` already.

    Args:
        value: Number or quantity string
        unit: Target unit, e.g. 'second' or 'byte'

    Returns:
        The magnitude in the target unit

    Raises:
        ConfigError: If the value cannot be parsed or has the wrong dimension
    """
    if isinstance(value, bool):
        raise ConfigError(f"Expected a quantity in {unit}, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    try:
        quantity = ureg.parse_expression(str(value))
    except (pint.errors.UndefinedUnitError, pint.errors.DefinitionSyntaxError,
            SyntaxError, TypeError, ValueError) as e:
        raise ConfigError(f"Cannot parse quantity {value!r}: {e}") from e
    if not isinstance(quantity, ureg.Quantity):
        return float(quantity)
    try:
        return float(quantity.to(unit).magnitude)
    except pint.errors.DimensionalityError as e:
        raise ConfigError(f"{value!r} cannot be expressed in {unit}") from e
