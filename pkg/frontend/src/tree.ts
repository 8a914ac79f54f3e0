import type { Assembly, Catalog, Placement } from './types';
import type { Selection } from './state';

export interface TreeHandlers {
  onSelectConnector(instanceId: string, connector: string): void;
  onDetach(instanceId: string): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function connectorSlots(
  placement: Placement,
  catalog: Catalog,
  assembly: Assembly,
  selection: Selection,
  handlers: TreeHandlers,
): HTMLElement {
  const wrap = el('div', 'connectors');
  const entry = catalog.modules.find(
    (m) => m.module_identifier === placement.module_id,
  );
  if (!entry) return wrap;
  const occupied = new Set(
    assembly.placements
      .filter((p) => p.parent_instance === placement.instance_id)
      .map((p) => p.parent_connector),
  );
  for (const conn of entry.connectors) {
    if (conn.kind !== 'output') continue;
    if (occupied.has(conn.name)) continue;
    const button = el('button', 'connector', `◦ ${conn.name}`);
    button.dataset.instance = placement.instance_id;
    button.dataset.connector = conn.name;
    if (
      selection.instanceId === placement.instance_id &&
      selection.connector === conn.name
    ) {
      button.classList.add('selected');
    }
    button.addEventListener('click', () =>
      handlers.onSelectConnector(placement.instance_id, conn.name),
    );
    wrap.appendChild(button);
  }
  return wrap;
}

function renderNode(
  placement: Placement,
  catalog: Catalog,
  assembly: Assembly,
  selection: Selection,
  handlers: TreeHandlers,
): HTMLElement {
  const node = el('li', 'tree-node');
  const row = el('div', 'node-row');
  const label = el('span', 'node-label',
    `${placement.instance_id} · ${placement.module_id}`);
  row.appendChild(label);
  const detach = el('button', 'detach', '✕');
  detach.title = `detach ${placement.instance_id} and its subtree`;
  detach.addEventListener('click', () => handlers.onDetach(placement.instance_id));
  row.appendChild(detach);
  node.appendChild(row);
  node.appendChild(connectorSlots(placement, catalog, assembly, selection, handlers));

  const children = assembly.placements.filter(
    (p) => p.parent_instance === placement.instance_id,
  );
  if (children.length) {
    const list = el('ul', 'tree-children');
    for (const child of children) {
      list.appendChild(renderNode(child, catalog, assembly, selection, handlers));
    }
    node.appendChild(list);
  }
  return node;
}

export function renderTree(
  assembly: Assembly,
  catalog: Catalog,
  selection: Selection,
  handlers: TreeHandlers,
): HTMLElement {
  const container = el('div', 'draft-tree');
  const root = assembly.placements.find((p) => p.parent_instance === null);
  if (!root) {
    const hint = el('div', 'empty-hint',
      'Empty draft: pick a module from the catalog to place the root.');
    container.appendChild(hint);
    return container;
  }
  const list = el('ul', 'tree-root');
  list.appendChild(renderNode(root, catalog, assembly, selection, handlers));
  container.appendChild(list);
  return container;
}
