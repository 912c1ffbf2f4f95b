from typing import Any, Dict, List
import logging


class DistributionRegistry:
    """
    A centralized registry of innovation distribution families.

    DistributionRegistry:
    example-usage::
        from regimerisk.core.registry.distribution_registry import DistributionRegistry

        family = DistributionRegistry.get_family("skew_student_t")
        family.logpdf(np.array([0.3]), 0.85, 8.0)

        # List the families with a skew parameter
        DistributionRegistry.list_families(skewed=True)
    """
    _registry = {}

    @classmethod
    def register_family(cls, name: str, family_instance: Any):
        """
        Register a distribution family.

        Args:
            name (str): The family name (e.g., "skew_student_t").
            family_instance: The family implementation.

        Raises:
            ValueError: If the name is already registered.
        """
        if name in cls._registry:
            raise ValueError(f"Distribution family '{name}' is already registered.")
        cls._registry[name] = family_instance

    @classmethod
    def unregister_family(cls, name: str):
        if name in cls._registry:
            cls._registry.pop(name)

    @classmethod
    def get_family(cls, name: str) -> Any:
        """
        Retrieve a family by name.

        Args:
            name (str): The family name.

        Returns:
            The family implementation.

        Raises:
            KeyError: If the family is unknown.
        """
        if name not in cls._registry:
            raise KeyError(f"Unknown distribution family '{name}'. Registered: {sorted(cls._registry)}")
        return cls._registry[name]

    @classmethod
    def list_families(cls, skewed: bool = None) -> List[str]:
        """
        List the registered family names, optionally filtered on whether they carry a skew parameter.

        Args:
            skewed (bool, optional): Keep only skewed (True) or only symmetric (False) families.

        Returns:
            List[str]: The family names in registration order.
        """
        if skewed is None:
            return list(cls._registry.keys())
        return [name for name, family in cls._registry.items() if getattr(family, "skewed", False) == skewed]

    @classmethod
    def get_family_metadata(cls) -> List[Dict[str, Any]]:
        """
        Retrieve metadata for all registered families.

        Returns:
            List[Dict[str, Any]]: One entry per family.
        """
        metadata = []
        for name in cls.list_families():
            family = cls._registry.get(name)
            if family and hasattr(family, "metadata"):
                try:
                    metadata.append(family.metadata())
                except Exception as e:
                    logging.warning(f"Failed to get metadata for family '{name}': {e}")
        return metadata
