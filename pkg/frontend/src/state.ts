import type { Catalog, DiscoverResponse, ReachResponse, SessionState } from './types';

// Selection is the only client-owned state; everything else mirrors the last
// server response, so a re-fetch of the session always reproduces the view.

export interface Selection {
  instanceId: string | null;
  connector: string | null;
}

export interface ComposerState {
  catalog: Catalog | null;
  session: SessionState | null;
  selection: Selection;
  report: DiscoverResponse | null;
  reach: Record<string, ReachResponse>;
  conflict: string | null; // inline message for a rejected attach
  busy: boolean;
}

type Listener = (state: ComposerState) => void;

export class Store {
  private state: ComposerState = {
    catalog: null,
    session: null,
    selection: { instanceId: null, connector: null },
    report: null,
    reach: {},
    conflict: null,
    busy: false,
  };
  private listeners: Listener[] = [];

  get(): ComposerState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  patch(partial: Partial<ComposerState>): void {
    this.state = { ...this.state, ...partial };
    this.emit();
  }

  setCatalog(catalog: Catalog): void {
    this.patch({ catalog });
  }

  /** Every mutation answer carries the authoritative session state. */
  applySession(session: SessionState): void {
    const occupied = new Set(
      session.assembly.placements
        .filter((p) => p.parent_instance !== null)
        .map((p) => `${p.parent_instance}:${p.parent_connector}`),
    );
    const sel = this.state.selection;
    const selectionGone =
      (sel.instanceId !== null &&
        !session.assembly.placements.some((p) => p.instance_id === sel.instanceId)) ||
      (sel.instanceId !== null &&
        sel.connector !== null &&
        occupied.has(`${sel.instanceId}:${sel.connector}`));
    this.patch({
      session,
      conflict: null,
      selection: selectionGone ? { instanceId: null, connector: null } : sel,
    });
  }

  applyDiscovery(report: DiscoverResponse): void {
    this.patch({ report, reach: {}, conflict: null, session: report });
  }

  addReach(result: ReachResponse): void {
    this.patch({ reach: { ...this.state.reach, [result.chain]: result } });
  }

  setConflict(message: string): void {
    this.patch({ conflict: message });
  }

  select(instanceId: string | null, connector: string | null): void {
    this.patch({ selection: { instanceId, connector }, conflict: null });
  }

  /** The report is stale whenever the draft moved past the discovered rev. */
  reportIsStale(): boolean {
    const { session, report } = this.state;
    return report !== null && session !== null && session.stale;
  }

  canDiscover(): boolean {
    const { session, busy } = this.state;
    return !busy && session !== null && session.assembly.placements.length > 0;
  }
}
