"""
regimerisk.workflows.workflow_progress_tracker
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Progress of a stage workflow: per-node status and wall time, and the share of nodes done.

Classes:
    - WorkflowProgressTracker: Tracks node status during workflow execution.
"""
import time
from typing import Any, Dict, List

PENDING = "Pending"
RUNNING = "Running"
COMPLETED = "Completed"
FAILED = "Failed"


class WorkflowProgressTracker:
    """
    Tracks the status of every node of a workflow run.
    """

    def __init__(self, node_names: List[str]):
        """
        Args:
            node_names (List[str]): Names of the nodes scheduled for this run.
        """
        self.node_status = {node: PENDING for node in node_names}
        self.node_times = {node: None for node in node_names}
        self.start_time = None

    def _check(self, node_name: str):
        if node_name not in self.node_status:
            raise ValueError(f"Node '{node_name}' is not scheduled in this run.")

    def start_workflow(self):
        self.start_time = time.time()

    def mark_node_running(self, node_name: str):
        self._check(node_name)
        self.node_status[node_name] = RUNNING
        self.node_times[node_name] = time.time()

    def mark_node_completed(self, node_name: str):
        """
        Mark a running node as completed and record its wall time.

        Raises:
            ValueError: If the node is unknown or was not running.
        """
        self._check(node_name)
        if self.node_status[node_name] != RUNNING:
            raise ValueError(f"Node '{node_name}' was not running.")
        self.node_status[node_name] = COMPLETED
        self.node_times[node_name] = time.time() - self.node_times[node_name]

    def mark_node_failed(self, node_name: str):
        self._check(node_name)
        started = self.node_times[node_name]
        self.node_status[node_name] = FAILED
        self.node_times[node_name] = time.time() - started if started is not None else None

    @property
    def failed_nodes(self) -> List[str]:
        return [node for node, status in self.node_status.items() if status == FAILED]

    def get_progress(self) -> Dict[str, Any]:
        """
        Current progress.

        Returns:
            Dict[str, Any]: Node status, node times, completed percentage and elapsed seconds.
        """
        completed = sum(1 for status in self.node_status.values() if status == COMPLETED)
        total = len(self.node_status)
        return {
            "node_status": dict(self.node_status),
            "node_times": dict(self.node_times),
            "progress_percentage": (completed / total) * 100 if total > 0 else 0,
            "elapsed_time": time.time() - self.start_time if self.start_time else None,
        }
