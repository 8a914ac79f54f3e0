import { describe, expect, it, vi } from 'vitest';
import { renderTree } from '../src/tree';
import { catalog, sessionWithArm } from './fixtures';

const noop = { onSelectConnector: vi.fn(), onDetach: vi.fn() };

describe('draft tree', () => {
  it('hints at an empty draft', () => {
    const node = renderTree({ root: '', placements: [] }, catalog,
      { instanceId: null, connector: null }, noop);
    expect(node.textContent).toContain('Empty draft');
  });

  it('renders one node per placement and only open connectors', () => {
    const assembly = sessionWithArm().assembly;
    const node = renderTree(assembly, catalog,
      { instanceId: null, connector: null }, noop);
    expect(node.querySelectorAll('.tree-node')).toHaveLength(3);
    const slots = [...node.querySelectorAll<HTMLButtonElement>('.connector')];
    const labels = slots.map((b) => `${b.dataset.instance}:${b.dataset.connector}`);
    // base:arm and j1:out are occupied; drill has no outputs
    expect(labels).toEqual(['base:front_left_leg']);
  });

  it('marks the selected connector and reports clicks', () => {
    const assembly = sessionWithArm().assembly;
    const onSelect = vi.fn();
    const node = renderTree(assembly, catalog,
      { instanceId: 'base', connector: 'front_left_leg' },
      { ...noop, onSelectConnector: onSelect });
    const slot = node.querySelector<HTMLButtonElement>('.connector')!;
    expect(slot.classList.contains('selected')).toBe(true);
    slot.click();
    expect(onSelect).toHaveBeenCalledWith('base', 'front_left_leg');
  });

  it('offers subtree detach per node', () => {
    const assembly = sessionWithArm().assembly;
    const onDetach = vi.fn();
    const node = renderTree(assembly, catalog,
      { instanceId: null, connector: null }, { ...noop, onDetach });
    const buttons = [...node.querySelectorAll<HTMLButtonElement>('.detach')];
    expect(buttons).toHaveLength(3);
    buttons[1].click();
    expect(onDetach).toHaveBeenCalledWith('j1');
  });
});
