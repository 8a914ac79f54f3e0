"""modforge: model compiler for modular reconfigurable robots.

Pipeline: declared assembly -> simulated EtherCAT ring -> network topology
recognition -> physical model expansion -> URDF/SRDF bundle, plus kinematic
queries (FK, Jacobian, inertia aggregation, reach envelope) over the result.
"""

from .assembly import AssemblySpec, Placement, load_assembly, validate_assembly
from .database import (ActuatorSpec, BodyInertia, ConnectorSpec, ModuleDatabase,
                       ModuleDescription, load_database, load_default_database,
                       lookup, validate_module)
from .ecat import EcatNetwork, EcatSlave, build_network, get_module_identifier, get_open_ports
from .errors import (AssemblyError, CatalogError, ContractError, CustomizationError,
                     Diagnostic, LimitError, ModelError, ModforgeError,
                     TopologyCorruptionError)
from .geometry import Transform, TwistAxis, twist_exp
from .kinematics import (FkResult, aggregate_inertia, chain_length, fk, jacobian,
                         reach_envelope, subtree_inertia)
from .model import (AddOn, BodyNode, Customization, JointEdge, PhysicalGraph,
                    apply_customization, expand, module_transform, name_model,
                    parent_child_transform)
from .pipeline import DiscoveryResult, run_discovery
from .presets import PRESET_NAMES, load_preset, preset_path
from .topology import (SlaveRecord, TopologyGraph, build_chi, find_parent_position,
                       recognize_topology)
from .urdf import emit_srdf, emit_urdf, load_bundle, parse_urdf, write_bundle

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
