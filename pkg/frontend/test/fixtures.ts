import type { Catalog, DiscoverResponse, SessionState } from '../src/types';

export const catalog: Catalog = {
  version: '1.0.0',
  modules: [
    {
      module_identifier: 'mobile_base_hub',
      module_type: 'Hub',
      esc_count: 2,
      semantic_tag: 'none',
      joint: null,
      connectors: [
        { name: 'input', kind: 'input', esc_index: 0, esc_port: 0, size: 'standard' },
        { name: 'front_left_leg', kind: 'output', esc_index: 1, esc_port: 1, size: 'standard' },
        { name: 'arm', kind: 'output', esc_index: 1, esc_port: 3, size: 'standard' },
      ],
    },
    {
      module_identifier: 'straight_a',
      module_type: 'Joint',
      esc_count: 1,
      semantic_tag: 'none',
      joint: { kind: 'revolute', actuator: {} },
      connectors: [
        { name: 'input', kind: 'input', esc_index: 0, esc_port: 0, size: 'standard' },
        { name: 'out', kind: 'output', esc_index: 0, esc_port: 2, size: 'standard' },
      ],
    },
    {
      module_identifier: 'drill_ee',
      module_type: 'EndEffector',
      esc_count: 1,
      semantic_tag: 'drill',
      joint: null,
      connectors: [
        { name: 'input', kind: 'input', esc_index: 0, esc_port: 0, size: 'standard' },
      ],
    },
  ],
};

export function emptySession(): SessionState {
  return {
    id: 'abc123',
    assembly: { root: '', placements: [] },
    customization: { homing: {}, addons: [] },
    draft_rev: 0,
    discovered_rev: -1,
    stale: false,
  };
}

export function sessionWithArm(): SessionState {
  return {
    id: 'abc123',
    assembly: {
      root: 'base',
      placements: [
        { instance_id: 'base', module_id: 'mobile_base_hub',
          parent_instance: null, parent_connector: null },
        { instance_id: 'j1', module_id: 'straight_a',
          parent_instance: 'base', parent_connector: 'arm' },
        { instance_id: 'drill', module_id: 'drill_ee',
          parent_instance: 'j1', parent_connector: 'out' },
      ],
    },
    customization: { homing: {}, addons: [] },
    draft_rev: 3,
    discovered_rev: -1,
    stale: false,
  };
}

// deliberately awkward floats: the UI must echo them without rounding
export function discovery(): DiscoverResponse {
  return {
    ...sessionWithArm(),
    discovered_rev: 3,
    stale: false,
    urdf: '<?xml version="1.0" encoding="utf-8"?>\n<robot name="r"/>\n',
    srdf: '<?xml version="1.0" encoding="utf-8"?>\n<robot name="r"/>\n',
    homing: '{\n  "J0A": 0.25\n}\n',
    manifest: '{\n  "assembly_hash": "deadbeef"\n}\n',
    stats: { build_network: 0.21, expand: 0.47 },
    warnings: [],
    summary: {
      robot_name: 'modforge_robot',
      bodies: 7,
      joints: 6,
      moving_joints: ['J0A'],
      chains: {
        A: { class: 'arm', base: 'base_link',
             bodies: ['L_0_0A', 'L_1_0A', 'L_1_1A'], tip: 'L_1_1A',
             end_effector: 'drill' },
      },
      chain_lengths: { A: 1.1500000000000001 },
      total_mass: 106.30000000000001,
    },
  };
}
