# Copyright 2026 mmloc contributors
#
# Description:
# mmloc Logging

import atexit
import logging
import os
import re
import time

import pandas as pd
import tabulate
import yaml

from .errors import RunAborted


class _mmloc_callback_handler_(logging.Handler):
    def emit(self, record: logging.LogRecord) -> None:
        Log._mmloc_callback(record)


def _empty_logdata() -> dict[str, list]:
    return {"Time": [], "Level": [], "Group": [], "Message": [], "Filename": [], "LineNo": []}


class Log:
    _logfile: str | None = None
    _loggers: list[logging.Logger] = []
    _logdata = _empty_logdata()
    _flush_level = 1000
    _first = True
    _records: list[logging.LogRecord] = []
    _level = logging.INFO
    _epoch = time.time()
    _installed = False

    @staticmethod
    def _mmloc_callback(record: logging.LogRecord) -> None:
        """
        Mirror a log record into the in-memory column store.

        Control characters are stripped, duplicate records (seen through parent loggers) are ignored,
        and the store is written out once it holds ``flush_level`` rows.

        :param record: The record being emitted.
        :type record: logging.LogRecord
        """

        def remove_control_chars(s: str) -> str:
            ansi_escape = re.compile(r"\x1B\[[0-?]*[ -/]*[@-~]")
            return ansi_escape.sub("", s)

        if record in Log._records:
            return
        Log._records.append(record)

        Log._logdata["Time"].append(round(record.created - Log._epoch, 6))
        Log._logdata["Level"].append(record.levelname)
        Log._logdata["Group"].append(record.name)
        Log._logdata["Message"].append(remove_control_chars(record.getMessage()))
        Log._logdata["Filename"].append(record.pathname)
        Log._logdata["LineNo"].append(record.lineno)

        if len(Log._logdata["Time"]) >= Log._flush_level:
            Log._flush_log()
            Log._logdata = _empty_logdata()
            Log._records = []

    @staticmethod
    def _install() -> None:
        """
        Attach the callback handler to the package logger and register the exit flush.
        Called once on package import.
        """
        if Log._installed:
            return

        Log._new_logger("mmloc")
        atexit.register(Log._flush_log)
        Log._installed = True

    @staticmethod
    def _new_logger(group: str) -> logging.Logger:
        """
        Creates a new logger with the specified group name.

        :param group: Name of the logger group.
        :type group: str
        :return: New logger instance.
        :rtype: logging.Logger
        """
        logger = logging.getLogger(group)
        logger.addHandler(_mmloc_callback_handler_())
        Log._loggers.append(logger)

        logger.setLevel(Log._level)
        return logger

    @staticmethod
    def _get_logger(group: str) -> logging.Logger:
        logger = logging.getLogger(group)
        if logger not in Log._loggers:
            logger = Log._new_logger(group)
        return logger

    @staticmethod
    def _flush_log() -> None:
        """
        Flushes the log data to the log file, if one is set.
        The file extension selects the format: CSV, JSON lines, YAML, TXT (grid), Markdown or reStructuredText.
        """

        if Log._logfile is None or not Log._logdata["Time"]:
            return

        fileext = os.path.splitext(Log._logfile)[1]
        d = pd.DataFrame(Log._logdata)
        mode = "w" if Log._first else "a"

        if fileext == ".csv":
            d = d.replace({r"\t": r"\\t", r"\n": r"\\n"}, regex=True)
            d.to_csv(Log._logfile, mode=mode, header=Log._first, index=False, quoting=1)
        elif fileext == ".json":
            d.to_json(Log._logfile, mode=mode, lines=True, orient="records")
        elif fileext in [".yml", ".yaml"]:
            d = d.replace({r"\t": r"\\t", r"\n": r"\\n"}, regex=True)
            with open(Log._logfile, mode) as f:
                yaml.dump(d.to_dict(orient="records"), f, default_flow_style=False, width=float("inf"))
        elif fileext == ".txt":
            with open(Log._logfile, mode) as f:
                f.write(tabulate.tabulate(d.values.tolist(), headers=d.columns, tablefmt="grid"))
                f.write("\n")
        elif fileext == ".md":
            with open(Log._logfile, mode) as f:
                markdown_view = d.to_markdown(index=False)
                assert markdown_view is not None
                f.write(markdown_view)
                f.write("\n")
        elif fileext == ".rst":
            with open(Log._logfile, mode) as f:
                f.write(tabulate.tabulate(d, headers="keys", tablefmt="rst", showindex=False))
                f.write("\n")
        else:
            raise ValueError(f"Unsupported file extension {fileext}")

        Log._first = False
        Log._logdata = _empty_logdata()
        Log._records = []

    @staticmethod
    def set_logfile(logfile: str | None) -> None:
        """
        Sets the log file. The extension determines the format
        (.csv, .json, .yml/.yaml, .txt, .md, .rst).

        :param logfile: Name of the log file, or None to stop writing.
        :type logfile: str | None
        """
        if logfile is not None:
            ext = os.path.splitext(logfile)[1]
            if ext not in (".csv", ".json", ".yml", ".yaml", ".txt", ".md", ".rst"):
                raise ValueError(f"Unsupported file extension {ext}")
        Log._logfile = logfile
        Log._first = True

    @staticmethod
    def set_flush_level(level: int) -> None:
        """
        Sets the number of buffered records that triggers a flush.

        :param level: Flush level to be set.
        :type level: int
        """
        Log._flush_level = level

    @staticmethod
    def set_level(level: int) -> None:
        """
        Set the level of every package logger, including ones created later.

        :param level: A ``logging`` level such as ``logging.DEBUG``.
        :type level: int
        """
        Log._level = level
        for logger in Log._loggers:
            logger.setLevel(level)

    @staticmethod
    def records() -> pd.DataFrame:
        """
        Records buffered since the last flush.

        :return: One row per record with columns Time, Level, Group, Message, Filename, LineNo.
        :rtype: pandas.DataFrame
        """
        return pd.DataFrame(Log._logdata)

    @staticmethod
    def debug(msg: str, group: str = "mmloc") -> None:
        """
        Logs a debug message.

        :param msg: Message to be logged.
        :type msg: str
        :param group: Group to which the message belongs.
        :type group: str
        """
        Log._get_logger(group).debug(msg, stacklevel=2)

    @staticmethod
    def info(msg: str, group: str = "mmloc") -> None:
        """
        Logs an info message.

        :param msg: Message to be logged.
        :type msg: str
        :param group: Group to which the message belongs.
        :type group: str
        """
        Log._get_logger(group).info(msg, stacklevel=2)

    @staticmethod
    def warn(msg: str, group: str = "mmloc") -> None:
        """
        Logs a warning message.

        :param msg: Message to be logged.
        :type msg: str
        :param group: Group to which the message belongs.
        :type group: str
        """
        Log._get_logger(group).warning(msg, stacklevel=2)

    @staticmethod
    def warning(msg: str, group: str = "mmloc") -> None:
        """
        Logs a warning message.

        :param msg: Message to be logged.
        :type msg: str
        :param group: Group to which the message belongs.
        :type group: str
        """
        Log._get_logger(group).warning(msg, stacklevel=2)

    @staticmethod
    def error(msg: str, group: str = "mmloc") -> None:
        """
        Logs an error message.

        :param msg: Message to be logged.
        :type msg: str
        :param group: Group to which the message belongs.
        :type group: str
        """
        Log._get_logger(group).error(msg, stacklevel=2)

    @staticmethod
    def critical(msg: str, group: str = "mmloc") -> None:
        """
        Logs a critical message and aborts the run by raising RunAborted.

        :param msg: Message to be logged.
        :type msg: str
        :param group: Group to which the message belongs.
        :type group: str
        :raises RunAborted: always
        """
        Log._get_logger(group).critical(msg, stacklevel=2)
        raise RunAborted(msg)

    @staticmethod
    def fatal(msg: str, group: str = "mmloc") -> None:
        """
        Logs a fatal message and aborts the run by raising RunAborted.

        :param msg: Message to be logged.
        :type msg: str
        :param group: Group to which the message belongs.
        :type group: str
        :raises RunAborted: always
        """
        Log._get_logger(group).fatal(msg, stacklevel=2)
        raise RunAborted(msg)


__all__ = ["Log"]
