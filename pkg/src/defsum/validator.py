"""Input validation for run configuration fields."""

import math
from typing import Iterable


class Validator:
    """Validates raw (string) run configuration values."""

    @staticmethod
    def validate_positive_int(input_str: str) -> tuple[bool, str]:
        """Validate a positive integer such as a horizon or a trial count.

        Args:
            input_str: The input string to validate.

        Returns:
            Tuple of (is_valid: bool, error_message: str).
            If valid, error_message is empty string.
        """
        stripped = (input_str or "").strip()
        if not stripped:
            return False, "Invalid: value required"
        if stripped.startswith("-") and stripped[1:].isdigit():
            return False, "Invalid: must be positive"
        if not stripped.isdigit():
            return False, "Invalid: integers only"
        if int(stripped) < 1:
            return False, "Invalid: must be positive"
        return True, ""

    @staticmethod
    def validate_non_negative_int(input_str: str) -> tuple[bool, str]:
        """Validate a seed: an integer >= 0."""
        stripped = (input_str or "").strip()
        if not stripped:
            return False, "Invalid: value required"
        if not stripped.isdigit():
            return False, "Invalid: non-negative integers only"
        return True, ""

    @staticmethod
    def validate_positive_float(input_str: str) -> tuple[bool, str]:
        """Validate a finite positive number such as a tolerance."""
        stripped = (input_str or "").strip()
        if not stripped:
            return False, "Invalid: value required"
        try:
            value = float(stripped)
        except ValueError:
            return False, "Invalid: numbers only"
        if not math.isfinite(value):
            return False, "Invalid: must be finite"
        if value <= 0:
            return False, "Invalid: must be positive"
        return True, ""

    @staticmethod
    def validate_choice(input_str: str, choices: Iterable[str]) -> tuple[bool, str]:
        """Validate that the value is one of a fixed set of ids."""
        choices = sorted(choices)
        if (input_str or "").strip() in choices:
            return True, ""
        return False, f"Invalid: expected one of {', '.join(choices)}"

    @staticmethod
    def validate_config_line(line: str) -> tuple[bool, str]:
        """Validate one ``key = value`` line of a config file.

        Blank lines and ``#`` comments are valid and carry nothing.
        """
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            return True, ""
        key, sep, _ = stripped.partition("=")
        if not sep:
            return False, "Invalid: expected key = value"
        if not key.strip():
            return False, "Invalid: empty key"
        return True, ""
