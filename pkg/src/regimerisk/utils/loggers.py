"""
regimerisk.utils.loggers
~~~~~~~~~~~~~~~~~~~~~~~~
Structured run logger used by the pipeline. Library modules log through `logging`; the
pipeline writes one line per stage event through `RunLogger` so a run can be replayed from
its log.

Classes:
    - RunLogger: Level-filtered text or JSON-lines logger with a stage field.
"""
import json
from datetime import datetime
from typing import Any, Dict, Optional

LEVELS = {"DEBUG": 10, "INFO": 20, "WARNING": 30, "ERROR": 40}


class RunLogger:
    """ Logger class for pipeline run output """

    def __init__(self, logger_name: str, file_path: Optional[str] = None, log_level: str = "INFO",
                 is_json: bool = False):
        """
        Initialize the logger.

        Args:
            logger_name (str): The name of the logger.
            file_path (str, optional): The file path to append the log output to. Defaults to None (stdout).
            log_level (str, optional): Minimum level written. Defaults to "INFO".
            is_json (bool, optional): Whether to log in JSON-lines format. Defaults to False.
        """
        if log_level not in LEVELS:
            raise ValueError(f"Unknown log level '{log_level}'. Expected one of {list(LEVELS)}.")
        self.file_path = file_path
        self.logger_name = logger_name
        self.log_level = log_level
        self.is_json = is_json

    @classmethod
    def from_config(cls, logger_name: str, config) -> "RunLogger":
        """
        Build a logger from a `LoggingConfig` section.
        """
        return cls(logger_name, file_path=config.file, log_level=config.level, is_json=config.json_format)

    def log(self, message: str, level: str = "INFO", stage: Optional[str] = None, **fields: Any):
        """
        Log a message if `level` is at or above the configured level.

        Args:
            message (str): The message to log.
            level (str): The message level.
            stage (str, optional): Pipeline stage the message belongs to.
            **fields: Extra key-value pairs, rendered after the message.
        """
        if LEVELS.get(level, 0) < LEVELS[self.log_level]:
            return
        self.__log_message(self.construct_message(message, level, stage, fields))

    def __log_message(self, formatted_message: str):
        if self.file_path is not None:
            with open(self.file_path, mode="a", encoding="utf-8") as output_file:
                output_file.write(formatted_message + "\n")
        else:
            print(formatted_message)

    def info(self, message: str, stage: Optional[str] = None, **fields: Any):
        self.log(message, "INFO", stage, **fields)

    def debug(self, message: str, stage: Optional[str] = None, **fields: Any):
        self.log(message, "DEBUG", stage, **fields)

    def error(self, message: str, stage: Optional[str] = None, **fields: Any):
        self.log(message, "ERROR", stage, **fields)

    def warning(self, message: str, stage: Optional[str] = None, **fields: Any):
        self.log(message, "WARNING", stage, **fields)

    def construct_message(self, message: str, log_level: str, stage: Optional[str] = None,
                          fields: Optional[Dict[str, Any]] = None) -> str:
        """
        Construct a log line.

        Args:
            message (str): The message.
            log_level (str): The log level.
            stage (str, optional): Pipeline stage.
            fields (dict, optional): Extra key-value pairs.

        Returns:
            str: The formatted line.
        """
        date_time = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        fields = fields or {}
        if self.is_json:
            record = {
                "timestamp": date_time,
                "logger": self.logger_name,
                "stage": stage,
                "message": message,
                "level": log_level,
            }
            record.update(fields)
            return json.dumps(record, default=str)
        prefix = f"[{self.logger_name}:{stage}]" if stage else f"[{self.logger_name}]"
        suffix = "".join(f" {key}={value}" for key, value in fields.items())
        return f"{log_level}: {date_time} - {prefix} - {message}{suffix}"
