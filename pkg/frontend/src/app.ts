import { api, ApiError, type Api } from './api';
import { renderCatalog } from './catalog';
import { degToRad, radToDeg } from './format';
import { renderReport } from './report';
import { Store } from './state';
import { renderTree } from './tree';

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

export function saveBlob(fileName: string, text: string): void {
  const blob = new Blob([text], { type: 'application/octet-stream' });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement('a');
  anchor.href = url;
  anchor.download = fileName;
  anchor.click();
  URL.revokeObjectURL(url);
}

export class App {
  store = new Store();

  constructor(
    private root: HTMLElement,
    private client: Api = api,
    private download: (name: string, text: string) => void = saveBlob,
  ) {}

  async start(): Promise<void> {
    this.store.subscribe(() => this.render());
    const [catalog, session] = await Promise.all([
      this.client.getCatalog(),
      this.client.createSession(),
    ]);
    this.store.setCatalog(catalog);
    this.store.applySession(session);
  }

  // actions ---------------------------------------------------------------

  private async guarded(action: () => Promise<void>): Promise<void> {
    this.store.patch({ busy: true });
    try {
      await action();
    } catch (err) {
      if (err instanceof ApiError) {
        this.store.setConflict(`${err.stage}: ${err.message}`);
      } else {
        this.store.setConflict(`network: ${String(err)} — draft unchanged, retry`);
      }
    } finally {
      this.store.patch({ busy: false });
    }
  }

  async pickModule(moduleId: string): Promise<void> {
    const { session, selection } = this.store.get();
    if (!session) return;
    const empty = session.assembly.placements.length === 0;
    if (!empty && (!selection.instanceId || !selection.connector)) {
      this.store.setConflict('select an open connector first');
      return;
    }
    await this.guarded(async () => {
      const updated = await this.client.attach(session.id, {
        module_id: moduleId,
        parent_instance: empty ? null : selection.instanceId,
        parent_connector: empty ? null : selection.connector,
      });
      this.store.applySession(updated);
    });
  }

  async detach(instanceId: string): Promise<void> {
    const { session } = this.store.get();
    if (!session) return;
    await this.guarded(async () => {
      const updated = await this.client.detach(session.id, instanceId);
      this.store.applySession(updated);
    });
  }

  async discover(): Promise<void> {
    const { session } = this.store.get();
    if (!session || !this.store.canDiscover()) return;
    await this.guarded(async () => {
      const report = await this.client.discover(session.id);
      this.store.applyDiscovery(report);
    });
  }

  async computeReach(chain: string): Promise<void> {
    const { session } = this.store.get();
    if (!session) return;
    await this.guarded(async () => {
      this.store.addReach(await this.client.reach(session.id, chain));
    });
  }

  async setHoming(joint: string, degrees: number): Promise<void> {
    const { session } = this.store.get();
    if (!session) return;
    const homing = { ...session.customization.homing, [joint]: degToRad(degrees) };
    await this.guarded(async () => {
      const updated = await this.client.setCustomization(session.id, {
        homing,
        addons: session.customization.addons,
      });
      this.store.applySession(updated);
    });
  }

  async addAddon(targetBody: string, moduleId: string): Promise<void> {
    const { session } = this.store.get();
    if (!session) return;
    const addons = [
      ...session.customization.addons,
      { target_body: targetBody, module_id: moduleId },
    ];
    await this.guarded(async () => {
      const updated = await this.client.setCustomization(session.id, {
        homing: session.customization.homing,
        addons,
      });
      this.store.applySession(updated);
    });
  }

  // rendering ---------------------------------------------------------------

  private customizationPanel(): HTMLElement {
    const state = this.store.get();
    const panel = el('div', 'customization');
    if (!state.report) return panel;
    panel.appendChild(el('h3', undefined, 'Homing (degrees)'));
    for (const joint of state.report.summary.moving_joints) {
      const row = el('label', 'homing-row', `${joint} `);
      const input = el('input') as HTMLInputElement;
      input.type = 'number';
      input.step = '1';
      const current = state.session?.customization.homing[joint];
      input.value = current !== undefined ? String(radToDeg(current)) : '0';
      input.addEventListener('change', () =>
        void this.setHoming(joint, Number(input.value)),
      );
      row.appendChild(input);
      panel.appendChild(row);
    }

    panel.appendChild(el('h3', undefined, 'Add-ons'));
    const bodySelect = el('select', 'addon-body') as HTMLSelectElement;
    for (const tag of Object.keys(state.report.summary.chains).sort()) {
      for (const body of state.report.summary.chains[tag].bodies) {
        const option = el('option', undefined, body) as HTMLOptionElement;
        option.value = body;
        bodySelect.appendChild(option);
      }
    }
    const moduleSelect = el('select', 'addon-module') as HTMLSelectElement;
    for (const entry of state.catalog?.modules ?? []) {
      if (entry.module_type !== 'EndEffector') continue;
      const option = el('option', undefined, entry.module_identifier) as HTMLOptionElement;
      option.value = entry.module_identifier;
      moduleSelect.appendChild(option);
    }
    const add = el('button', 'addon-add', 'attach add-on');
    add.addEventListener('click', () =>
      void this.addAddon(bodySelect.value, moduleSelect.value),
    );
    panel.append(bodySelect, moduleSelect, add);
    return panel;
  }

  render(): void {
    const state = this.store.get();
    this.root.textContent = '';

    const layout = el('div', 'layout');
    const left = el('div', 'pane pane-catalog');
    const middle = el('div', 'pane pane-draft');
    const right = el('div', 'pane pane-report');
    layout.append(left, middle, right);
    this.root.appendChild(layout);

    if (state.catalog) {
      left.appendChild(renderCatalog(state.catalog, {
        onPick: (moduleId) => void this.pickModule(moduleId),
      }));
    }

    middle.appendChild(el('h2', undefined, 'Draft assembly'));
    if (state.conflict) {
      middle.appendChild(el('div', 'conflict', state.conflict));
    }
    if (state.session && state.catalog) {
      middle.appendChild(renderTree(state.session.assembly, state.catalog,
        state.selection, {
          onSelectConnector: (instance, connector) =>
            this.store.select(instance, connector),
          onDetach: (instance) => void this.detach(instance),
        }));
    }
    const discoverButton = el('button', 'discover', 'Discover model');
    (discoverButton as HTMLButtonElement).disabled = !this.store.canDiscover();
    discoverButton.addEventListener('click', () => void this.discover());
    middle.appendChild(discoverButton);

    if (state.report) {
      right.appendChild(renderReport(state.report, state.reach,
        this.store.reportIsStale(), {
          onReach: (chain) => void this.computeReach(chain),
          onDownload: this.download,
        }));
      right.appendChild(this.customizationPanel());
    } else {
      right.appendChild(el('div', 'empty-hint',
        'No model yet — compose a draft and run discovery.'));
    }
  }
}
