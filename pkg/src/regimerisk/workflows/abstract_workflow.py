"""
regimerisk.workflows.abstract_workflow
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Base class for dependency workflows: node registration, cycle checks, topological execution
order and execution up to a target node.

Classes:
    - AbstractWorkflow: Base class of the pipeline workflow.
"""
import logging
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional

from regimerisk.workflows.node import Node
from regimerisk.workflows.workflow_progress_tracker import WorkflowProgressTracker

logger = logging.getLogger(__name__)


class AbstractWorkflow(ABC):
    """
    Abstract base class for workflows.

    Subclasses add their nodes in `define_workflow`; `execute` runs them in dependency order.
    """

    def __init__(self, name: str):
        """
        Args:
            name (str): The name of the workflow.
        """
        self.name = name
        self._nodes: Dict[str, Node] = {}
        self.tracker: Optional[WorkflowProgressTracker] = None

    @property
    def nodes(self) -> Dict[str, Node]:
        return self._nodes

    @nodes.setter
    def nodes(self, nodes):
        raise ValueError("Cannot set nodes directly. Use add_node method instead.")

    @abstractmethod
    def define_workflow(self):
        """
        Add the nodes of the workflow. Must be implemented in subclasses.
        """
        pass

    def get_node_by_name(self, name: str) -> Node:
        if name not in self.nodes:
            raise ValueError(f"Node '{name}' does not exist in the workflow.")
        return self.nodes[name]

    def add_node(self, node: Node):
        """
        Add a node whose upstream nodes are already registered.

        Raises:
            ValueError: If the name is taken or an upstream node is missing.
        """
        if node.name in self.nodes:
            raise ValueError(f"Node '{node.name}' already exists in the workflow.")
        node.get_dependencies(self.nodes)
        self._nodes[node.name] = node

    def get_node_parents(self, node_name: str) -> List[Node]:
        return self.get_node_by_name(node_name).get_parents(self.nodes)

    def _validate_dependencies(self) -> None:
        """
        Raises:
            ValueError: If the workflow is empty, references unknown nodes or has a cycle.
        """
        if not self.nodes:
            raise ValueError("Workflow has no nodes to validate.")
        visited, stack = set(), set()

        def visit(node_name: str):
            if node_name in stack:
                raise ValueError(f"Circular dependency detected involving '{node_name}'.")
            if node_name in visited:
                return
            stack.add(node_name)
            visited.add(node_name)
            for parent in self.get_node_by_name(node_name).get_parents(self.nodes):
                visit(parent.name)
            stack.remove(node_name)

        for node_name in self.nodes:
            visit(node_name)

    def determine_execution_order(self, until: Optional[str] = None) -> List[str]:
        """
        Topological order of the nodes, restricted to `until` and its dependencies when given.

        Args:
            until (str, optional): Last node to run.

        Returns:
            List[str]: Node names in execution order.
        """
        if not self.nodes:
            raise ValueError("Workflow has no nodes to determine execution order.")
        order, visited = [], set()

        def dfs(node_name: str):
            if node_name in visited:
                return
            visited.add(node_name)
            for parent in self.nodes[node_name].get_parents(self.nodes):
                dfs(parent.name)
            order.append(node_name)

        targets = [self.get_node_by_name(until).name] if until else list(self.nodes)
        for node_name in targets:
            dfs(node_name)
        return order

    def execute(self, inputs: Dict[str, Any] = None, until: Optional[str] = None) -> Dict[str, Any]:
        """
        Execute the workflow.

        Args:
            inputs (Dict[str, Any], optional): Workflow-level inputs offered to every node.
            until (str, optional): Stop after this node; only its dependencies run.

        Returns:
            Dict[str, Any]: Node results keyed by node name.
        """
        self._validate_dependencies()
        order = self.determine_execution_order(until)
        self.tracker = WorkflowProgressTracker(order)
        self.tracker.start_workflow()
        results: Dict[str, Any] = {}
        for node_name in order:
            self.tracker.mark_node_running(node_name)
            try:
                results[node_name] = self.nodes[node_name].execute(results=results, inputs=inputs)
            except Exception:
                self.tracker.mark_node_failed(node_name)
                logger.error(f"Workflow '{self.name}' failed at node '{node_name}'")
                raise
            self.tracker.mark_node_completed(node_name)
            logger.info(f"Workflow '{self.name}': {self.tracker.get_progress()['progress_percentage']:.0f}% done")
        return results
