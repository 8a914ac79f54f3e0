import type { Catalog, ModuleEntry } from './types';

export interface CatalogHandlers {
  onPick(moduleId: string): void;
}

const TYPE_ORDER: ModuleEntry['module_type'][] = ['Hub', 'Joint', 'Link', 'EndEffector'];

export function renderCatalog(catalog: Catalog, handlers: CatalogHandlers): HTMLElement {
  const container = document.createElement('div');
  container.className = 'catalog';
  const heading = document.createElement('h2');
  heading.textContent = `Catalog ${catalog.version}`;
  container.appendChild(heading);

  for (const moduleType of TYPE_ORDER) {
    const group = catalog.modules.filter((m) => m.module_type === moduleType);
    if (!group.length) continue;
    const title = document.createElement('h3');
    title.textContent = moduleType;
    container.appendChild(title);
    const list = document.createElement('div');
    list.className = 'catalog-group';
    for (const entry of group) {
      const button = document.createElement('button');
      button.className = 'catalog-entry';
      button.dataset.moduleId = entry.module_identifier;
      const outs = entry.connectors.filter((c) => c.kind === 'output').length;
      const traits = [
        entry.joint ? entry.joint.kind : 'passive',
        `${outs} out`,
        entry.esc_count === 0 ? 'no ESC (add-on)' : null,
        entry.semantic_tag !== 'none' ? entry.semantic_tag : null,
      ].filter(Boolean);
      button.textContent = `${entry.module_identifier} — ${traits.join(', ')}`;
      button.addEventListener('click', () => handlers.onPick(entry.module_identifier));
      list.appendChild(button);
    }
    container.appendChild(list);
  }
  return container;
}
