// Payload shapes of the /v1 API. The server is the source of truth; these
// mirror its JSON exactly.

export interface ConnectorSpec {
  name: string;
  kind: 'input' | 'output';
  esc_index: number | null;
  esc_port: number | null;
  size: string;
}

export interface ModuleEntry {
  module_identifier: string;
  module_type: 'Joint' | 'Link' | 'Hub' | 'EndEffector';
  esc_count: number;
  connectors: ConnectorSpec[];
  semantic_tag: string;
  joint: { kind: string; actuator: Record<string, unknown> } | null;
}

export interface Catalog {
  version: string;
  modules: ModuleEntry[];
}

export interface Placement {
  instance_id: string;
  module_id: string;
  parent_instance: string | null;
  parent_connector: string | null;
  flipped?: boolean;
}

export interface Assembly {
  root: string;
  placements: Placement[];
}

export interface SessionState {
  id: string;
  assembly: Assembly;
  customization: { homing: Record<string, number>; addons: unknown[] };
  draft_rev: number;
  discovered_rev: number;
  stale: boolean;
}

export interface ChainSummary {
  class: 'arm' | 'leg' | 'unclassified';
  base: string | null;
  bodies: string[];
  tip: string | null;
  end_effector: string | null;
}

export interface DiscoverySummary {
  robot_name: string;
  bodies: number;
  joints: number;
  moving_joints: string[];
  chains: Record<string, ChainSummary>;
  chain_lengths: Record<string, number>;
  total_mass: number;
}

export interface DiscoverResponse extends SessionState {
  urdf: string;
  srdf: string;
  homing: string;
  manifest: string;
  stats: Record<string, number>;
  warnings: string[];
  summary: DiscoverySummary;
}

export interface FkResponse {
  frame: string;
  translation: [number, number, number];
  rpy: [number, number, number];
}

export interface ReachResponse {
  chain: string;
  min_height: number;
  max_height: number;
  max_radius: number;
  metadata: { samples: number; joints: string[]; tip: string; method: string };
}

export interface ApiErrorBody {
  error: { stage: string; entity: string | null; message: string };
}
