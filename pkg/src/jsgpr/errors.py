"""Exception hierarchy shared by the package."""


class JsgprError(Exception):
    """Base class for every error raised by :mod:`jsgpr`."""


# topology ingestion
class TopologyError(JsgprError):
    pass


class MalformedXml(TopologyError):
    pass


class EmptyGraph(TopologyError):
    pass


class MissingCoordinates(TopologyError):
    def __init__(self, node_id, detail="missing or out-of-range Latitude/Longitude"):
        super().__init__(f"node {node_id!r}: {detail}")
        self.node_id = node_id


class DuplicateEdge(TopologyError):
    def __init__(self, u, v):
        super().__init__(f"duplicate edge between {u!r} and {v!r}")
        self.u, self.v = u, v


class DisconnectedGraph(TopologyError):
    def __init__(self, components):
        sizes = ", ".join(str(len(c)) for c in components)
        super().__init__(f"graph has {len(components)} components (sizes {sizes})")
        self.components = components


class UnknownNode(TopologyError):
    pass


# instance construction
class InstanceError(JsgprError):
    pass


class IsolatedDemandNode(InstanceError):
    def __init__(self, node_id):
        super().__init__(f"demand node {node_id!r} has no incident link")
        self.node_id = node_id


class EmptyCandidateSet(InstanceError):
    pass


class EmptyDemandSet(InstanceError):
    pass


class ZeroDemand(InstanceError):
    pass


# linear models
class ModelError(JsgprError):
    pass


class InvertedBounds(ModelError):
    pass


class UnknownColumn(ModelError):
    pass


class SubsetLimitExceeded(JsgprError):
    pass


class Infeasible(JsgprError):
    """Raised when a fixed-placement routing problem has no feasible flow."""
