# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Factory (configuration store)
import fnmatch
import os
import re
from typing import Any

import tabulate
import yaml

from .errors import ConfigError


class Factory:
    _variables: dict[str, Any] = {}
    _variables_regex: re.Pattern | None = None
    _variables_overrides: dict[str, Any] = {}

    _sentinal = object()
    _fmt = "grid"

    @staticmethod
    def _compile_regex(mapping: dict[str, Any]) -> tuple[re.Pattern | None, dict[str, Any]]:
        """
        Compile glob patterns into a single regex with named groups.

        :param mapping: A dictionary mapping glob patterns to values.
        :type mapping: dict[str, Any]
        :return: A tuple containing the compiled regex and a mapping from group names to values.
        :rtype: tuple[Optional[re.Pattern], dict[str, Any]]
        """
        if not mapping:
            return None, {}

        # Most specific first
        sorted_patterns = sorted(
            mapping.keys(),
            key=Factory.specificity,
            reverse=True,
        )

        group_to_value: dict[str, Any] = {}
        regex_parts = []

        for i, glob in enumerate(sorted_patterns):
            group_name = f"m{i}"
            regex = fnmatch.translate(glob)
            regex_parts.append(f"(?P<{group_name}>{regex})")
            group_to_value[group_name] = mapping[glob]

        return re.compile("|".join(regex_parts)), group_to_value

    def __str__(self) -> str:
        """
        Return a string representation of the configuration store.

        :return: String representation of the Factory.
        :rtype: str
        """

        s = "\n========== CONFIGURATION ==========\n"

        if Factory._variables:
            s += tabulate.tabulate(sorted(Factory._variables.items()), headers=["Path", "Value"], tablefmt=Factory._fmt)

        s += "\n===================================\n"
        return s

    @staticmethod
    def print_factory() -> None:
        """
        Print every configuration variable.
        """
        print(Factory())

    @staticmethod
    def specificity(pattern: str) -> tuple[float, int]:
        """
        Calculate specificity score for a pattern (higher = more specific).
        Literal characters add to the score, wildcards subtract and character classes add half a point.

        :param pattern: The pattern to evaluate.
        :type pattern: str
        :return: Specificity score.
        :rtype: tuple[float, int]
        """
        literal_chars = len(re.sub(r"[*?[\]]", "", pattern))
        wildcards = pattern.count("*") + pattern.count("?")
        char_classes = len(re.findall(r"\[[^\]]+\]", pattern))

        score = literal_chars - wildcards + char_classes * 0.5

        return (score, len(pattern))

    @staticmethod
    def clear_factory() -> None:
        """
        Remove all configuration entries
        """
        Factory._variables = {}
        Factory._variables_regex = None
        Factory._variables_overrides = {}
        Factory._fmt = "grid"

    @staticmethod
    def set_variable(path: str, value: Any, allow_override: bool = False) -> None:
        """
        Set a variable.

        :param path: The (dotted, optionally wildcarded) path to the variable.
        :type path: str
        :param value: The value to set for the variable.
        :type value: Any
        :param allow_override: Allow existing variable to be overridden
        :type allow_override: bool
        """
        if path not in Factory._variables or allow_override:
            Factory._variables[path] = value

        Factory._variables_regex, Factory._variables_overrides = Factory._compile_regex(Factory._variables)

    @staticmethod
    def get_variable(path: str, default: Any = _sentinal) -> Any:
        """
        Get the value of a variable by its path if it exists, otherwise return the default value.

        :param path: The path to the variable.
        :type path: str
        :param default: The default value to return if no match is found.
        :type default: Any
        :raises KeyError: when there is no match and no default
        :return: The value of the variable or the default value.
        :rtype: Any
        """

        match = Factory._variables_regex.match(path) if Factory._variables_regex else None

        if match is not None and match.lastgroup is not None:
            return Factory._variables_overrides[match.lastgroup]
        elif default is not Factory._sentinal:
            return default
        else:
            raise KeyError(f"No variable in the factory matches Path argument ({path}), and no default value is provided.")

    @staticmethod
    def has_variable(path: str) -> bool:
        """
        :return: True when some pattern matches ``path``.
        :rtype: bool
        """
        marker = object()
        return Factory.get_variable(path, marker) is not marker

    @staticmethod
    def _flatten(prefix: str, node: Any, out: dict[str, Any]) -> None:
        if isinstance(node, dict):
            for k, v in node.items():
                Factory._flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
        else:
            out[prefix] = node

    @staticmethod
    def load_config(path: str) -> dict[str, Any]:
        """
        Load a YAML configuration file into the store.

        Nested sections become dotted paths (``noise: {sigma_d: 0.1}`` is ``noise.sigma_d``); lists are leaves.
        Loaded values override existing ones.

        :param path: YAML file.
        :type path: str
        :raises ConfigError: missing file or a document that is not a mapping
        :return: The flattened entries that were set.
        :rtype: dict[str, Any]
        """
        if not os.path.exists(path):
            raise ConfigError(f"Configuration file {path} does not exist")

        with open(path) as f:
            try:
                doc = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ConfigError(f"Cannot parse {path}: {e}") from e

        if doc is None:
            doc = {}
        if not isinstance(doc, dict):
            raise ConfigError(f"Configuration file {path} must contain a mapping, got {type(doc).__name__}")

        flat: dict[str, Any] = {}
        Factory._flatten("", doc, flat)
        for k, v in flat.items():
            Factory.set_variable(k, v, allow_override=True)
        return flat


__all__ = ["Factory"]
