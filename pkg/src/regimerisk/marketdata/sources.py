"""
regimerisk.marketdata.sources
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Character-stream sources that feed the CSV parsers: a file on disk or an in-memory buffer.

Classes:
    - PriceSource: Abstract base class for price text sources.
    - FilePriceSource: Reads UTF-8 text from a file.
    - StringBufferPriceSource: Serves text from a string or an iterable of lines.
"""
from abc import ABC, abstractmethod
from typing import Any, Dict, Iterable, Union


class PriceSource(ABC):

    def __init__(self, name: str, **kwargs: Dict[str, Any]):
        """ Initialize the PriceSource with the name of the source.
        Args:
            name (str): The name of the source, used in error messages.
        """
        self.name = name

    def get_data(self, **kwargs: Dict[str, Any]) -> Dict[str, Any]:
        return {"text": self.get_text(**kwargs), "source": self.name}

    @abstractmethod
    def get_text(self, **kwargs: Dict[str, Any]) -> str:
        """
        Get the text from the source.

        Returns:
            str: The full text content.
        """
        pass


class FilePriceSource(PriceSource):
    """
    Price source that reads a CSV file.
    """
    def __init__(self, file_path: str = None, **kwargs: Dict[str, Any]):
        if "name" not in kwargs:
            kwargs["name"] = str(file_path) if file_path is not None else "FilePriceSource"
        super().__init__(**kwargs)
        self.file_path = file_path

    def get_text(self, **kwargs: Dict[str, Any]) -> str:
        """
        Get the text of the file.

        Raises:
            ValueError: If no file path was given.
            FileNotFoundError: If the file does not exist.
        """
        if "file_path" in kwargs:
            self.file_path = kwargs.pop("file_path", None)
        if self.file_path is None:
            raise ValueError("File path is required for FilePriceSource")
        try:
            with open(self.file_path, "r", encoding="utf-8") as file:
                return file.read()
        except FileNotFoundError:
            raise FileNotFoundError(f"File not found: {self.file_path}")
        except IOError as e:
            raise IOError(f"Error reading file {self.file_path}: {e}")


class StringBufferPriceSource(PriceSource):
    """
    A price source backed by a string, or an iterable of lines joined with newlines.
    """
    def __init__(self, buffer: Union[str, Iterable[str]] = None, **kwargs: Dict[str, Any]):
        if "name" not in kwargs:
            kwargs["name"] = "StringBufferPriceSource"
        super().__init__(**kwargs)
        self.buffer = buffer

    def get_text(self, **kwargs: Dict[str, Any]) -> str:
        if "buffer" in kwargs:
            self.buffer = kwargs.pop("buffer", None)
        if self.buffer is None:
            raise ValueError("Buffer is required for StringBufferPriceSource")
        if isinstance(self.buffer, str):
            return self.buffer
        elif isinstance(self.buffer, Iterable):
            return "\n".join(line.rstrip("\n") for line in self.buffer)
        else:
            raise ValueError("Buffer must be a string or an iterable of strings.")
