"""
regimerisk.workflows.node
~~~~~~~~~~~~~~~~~~~~~~~~~
Nodes of the stage workflow.

A node names its upstream nodes through `inputs`, a mapping from a keyword argument of the
node's callable to the node whose result feeds it. Workflow-level inputs (the run context)
are passed by keyword when the callable accepts them.

Classes:
    - Node: Abstract workflow node.
    - StageNode: Node running one pipeline stage function.
"""
import inspect
from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, List


class Node(ABC):
    def __init__(self, name: str, inputs: Dict[str, str] = None):
        """
        Initialize the node.

        Args:
            name (str): Unique node name.
            inputs (Dict[str, str], optional): Keyword argument -> upstream node name.
        """
        self.name = name
        self.inputs = inputs or {}

    def get_parents(self, nodes: Dict[str, "Node"]) -> List["Node"]:
        """
        Direct upstream nodes.

        Raises:
            ValueError: If an upstream node is not part of the workflow.
        """
        missing = [source for source in self.inputs.values() if source not in nodes]
        if missing:
            raise ValueError(f"Node '{self.name}' depends on unknown node(s) {missing}.")
        return [nodes[source] for source in dict.fromkeys(self.inputs.values())]

    def get_dependencies(self, nodes: Dict[str, "Node"]) -> Dict[str, "Node"]:
        """
        Transitive upstream nodes keyed by name.
        """
        dependencies = {}
        for parent in self.get_parents(nodes):
            dependencies[parent.name] = parent
            dependencies.update(parent.get_dependencies(nodes))
        return dependencies

    def _resolve_inputs(self, results: Dict[str, Any]) -> Dict[str, Any]:
        resolved = {}
        for key, source in self.inputs.items():
            if source not in results:
                raise KeyError(f"Input '{key}' of node '{self.name}' needs the result of '{source}', "
                               "which has not been produced.")
            resolved[key] = results[source]
        return resolved

    @abstractmethod
    def execute(self, results: Dict[str, Any], inputs: Dict[str, Any] = None) -> Any:
        """
        Run the node.

        Args:
            results (Dict[str, Any]): Results of the nodes executed so far.
            inputs (Dict[str, Any], optional): Workflow-level inputs.

        Returns:
            Any: The node result.
        """
        pass


class StageNode(Node):
    """
    Node wrapping a stage function; upstream results and matching workflow inputs become its
    keyword arguments.
    """

    def __init__(self, name: str, stage: Callable[..., Any], inputs: Dict[str, str] = None):
        if not callable(stage):
            raise ValueError(f"The stage of node '{name}' must be callable. Got {type(stage)} instead.")
        super().__init__(name, inputs)
        self.stage = stage

    def stage_arguments(self, results: Dict[str, Any], inputs: Dict[str, Any] = None) -> Dict[str, Any]:
        """
        Keyword arguments for the stage function.

        Raises:
            KeyError: If a required parameter of the stage is neither an upstream result nor an input.
        """
        signature = inspect.signature(self.stage)
        arguments = self._resolve_inputs(results)
        for key, value in (inputs or {}).items():
            if key in signature.parameters and key not in arguments:
                arguments[key] = value
        for name, parameter in signature.parameters.items():
            if parameter.default is inspect.Parameter.empty and name not in arguments:
                raise KeyError(f"Required parameter '{name}' of stage '{self.name}' is missing.")
        return arguments

    def execute(self, results: Dict[str, Any], inputs: Dict[str, Any] = None) -> Any:
        return self.stage(**self.stage_arguments(results, inputs))

    def __repr__(self):
        return f"StageNode(name={self.name}, stage={self.stage.__name__}, dependencies={list(self.inputs.values())})"
