"""
File I/O utilities for FlowLaw
"""

import json
import os
import tempfile
from typing import Any, Callable, Dict, List

import pandas as pd

from ..core.errors import InputFormatError
from ..core.flow_model import Flow, Packet, validate_ipv4

FLOW_COLUMNS = ['start_time', 'ip', 'size_bytes', 'duration_s']
PACKET_COLUMNS = ['start_time', 'ip', 'size_bytes']
FLOAT_FORMAT = '%.10g'


class FileIO:
    """Utility class for file input/output operations"""

    @staticmethod
    def _atomic_write(filename: str, write: Callable[[str], None]):
        """Write through a temporary file in the target directory, then rename it over filename"""
        directory = os.path.dirname(os.path.abspath(filename))
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(filename))
        os.close(fd)
        try:
            write(tmp)
            os.replace(tmp, filename)
        except BaseException:
            if os.path.exists(tmp):
                os.remove(tmp)
            raise

    @staticmethod
    def write_csv(filename: str, frame: pd.DataFrame):
        """Write a DataFrame to CSV with a fixed float format"""
        FileIO._atomic_write(
            filename,
            lambda tmp: frame.to_csv(tmp, index=False, float_format=FLOAT_FORMAT, lineterminator='\n'),
        )

    @staticmethod
    def write_json(filename: str, data: Any):
        """Write JSON with sorted keys"""
        def write(tmp):
            with open(tmp, 'w') as f:
                json.dump(data, f, indent=2, sort_keys=True)
                f.write('\n')
        FileIO._atomic_write(filename, write)

    @staticmethod
    def read_json(filename: str) -> Dict:
        """
        Read a JSON file

        Raises:
            InputFormatError: If the file is missing or not valid JSON
        """
        try:
            with open(filename) as f:
                return json.load(f)
        except FileNotFoundError as e:
            raise InputFormatError(f"File not found: {filename}") from e
        except json.JSONDecodeError as e:
            raise InputFormatError(f"Invalid JSON in {filename}: {e}") from e

    @staticmethod
    def read_csv(filename: str, columns: List[str]) -> pd.DataFrame:
        """
        Read a CSV file and check that it has rows and the given columns

        Raises:
            InputFormatError: If the file is missing, empty or lacks a column
        """
        try:
            frame = pd.read_csv(filename)
        except FileNotFoundError as e:
            raise InputFormatError(f"File not found: {filename}") from e
        except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
            raise InputFormatError(f"Cannot read {filename}: {e}") from e
        missing = [c for c in columns if c not in frame.columns]
        if missing:
            raise InputFormatError(f"{filename} lacks column(s) {missing}")
        if frame.empty:
            raise InputFormatError(f"{filename} holds no rows")
        return frame

    @staticmethod
    def read_flows(filename: str) -> List[Flow]:
        """Read a flow CSV (start_time, ip, size_bytes, duration_s)"""
        frame = FileIO.read_csv(filename, FLOW_COLUMNS)
        try:
            return [Flow(user_ip=validate_ipv4(str(r.ip)), size_bytes=float(r.size_bytes),
                         duration_s=float(r.duration_s), start_time=float(r.start_time))
                    for r in frame[FLOW_COLUMNS].itertuples(index=False)]
        except (TypeError, ValueError) as e:
            raise InputFormatError(f"Malformed flow row in {filename}: {e}") from e

    @staticmethod
    def read_packets(filename: str) -> List[Packet]:
        """Read a packet CSV (start_time, ip, size_bytes)"""
        frame = FileIO.read_csv(filename, PACKET_COLUMNS)
        try:
            return [Packet(user_ip=validate_ipv4(str(r.ip)), size_bytes=float(r.size_bytes),
                           start_time=float(r.start_time))
                    for r in frame[PACKET_COLUMNS].itertuples(index=False)]
        except (TypeError, ValueError) as e:
            raise InputFormatError(f"Malformed packet row in {filename}: {e}") from e

    @staticmethod
    def flows_to_dataframe(flows: List[Flow]) -> pd.DataFrame:
        """Flows as a table in CSV column order"""
        return pd.DataFrame(
            [(f.start_time, f.user_ip, f.size_bytes, f.duration_s) for f in flows],
            columns=FLOW_COLUMNS,
        )

    @staticmethod
    def write_flows(filename: str, flows: List[Flow]):
        FileIO.write_csv(filename, FileIO.flows_to_dataframe(flows))
