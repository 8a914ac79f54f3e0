import { meters, millis, verbatim } from './format';
import type { DiscoverResponse, ReachResponse } from './types';

export interface ReportHandlers {
  onReach(chain: string): void;
  onDownload(fileName: string, text: string): void;
}

export const BUNDLE_FILES = [
  'robot.urdf',
  'robot.srdf',
  'homing.json',
  'manifest.json',
] as const;

export function bundleTexts(report: DiscoverResponse): Record<string, string> {
  return {
    'robot.urdf': report.urdf,
    'robot.srdf': report.srdf,
    'homing.json': report.homing,
    'manifest.json': report.manifest,
  };
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

export function renderReport(
  report: DiscoverResponse,
  reach: Record<string, ReachResponse>,
  stale: boolean,
  handlers: ReportHandlers,
): HTMLElement {
  const container = el('div', 'report');
  const heading = el('h2', undefined, 'Discovered model');
  container.appendChild(heading);
  if (stale) {
    container.appendChild(
      el('div', 'stale-banner',
        'Draft edited after discovery — this report is stale until re-run.'),
    );
  }

  const counts = el('p', 'counts',
    `${report.summary.bodies} bodies, ${report.summary.joints} joints, ` +
    `${report.summary.moving_joints.length} actuated`);
  container.appendChild(counts);

  const table = el('table', 'chain-table');
  const head = el('tr');
  for (const caption of ['chain', 'class', 'length', 'tip', 'reach']) {
    head.appendChild(el('th', undefined, caption));
  }
  table.appendChild(head);
  for (const tag of Object.keys(report.summary.chains).sort()) {
    const chain = report.summary.chains[tag];
    const row = el('tr');
    row.appendChild(el('td', undefined, tag));
    row.appendChild(el('td', undefined, chain.class));
    const length = report.summary.chain_lengths[tag];
    row.appendChild(el('td', 'chain-length', meters(length)));
    row.appendChild(el('td', undefined, chain.tip ?? '—'));
    const reachCell = el('td', 'reach-cell');
    const result = reach[tag];
    if (result) {
      reachCell.textContent =
        `z ∈ [${verbatim(result.min_height)}, ${verbatim(result.max_height)}] m, ` +
        `r ≤ ${verbatim(result.max_radius)} m`;
    } else if (chain.tip) {
      const button = el('button', 'reach-button', 'compute');
      button.addEventListener('click', () => handlers.onReach(tag));
      reachCell.appendChild(button);
    } else {
      reachCell.textContent = '—';
    }
    row.appendChild(reachCell);
    table.appendChild(row);
  }
  container.appendChild(table);

  const timings = el('p', 'timings',
    Object.entries(report.stats)
      .map(([stage, ms]) => `${stage} ${millis(ms)}`)
      .join(' · '));
  container.appendChild(timings);

  const downloads = el('div', 'downloads');
  const texts = bundleTexts(report);
  for (const name of BUNDLE_FILES) {
    const button = el('button', 'download', `download ${name}`);
    button.addEventListener('click', () => handlers.onDownload(name, texts[name]));
    downloads.appendChild(button);
  }
  container.appendChild(downloads);

  for (const warning of report.warnings) {
    container.appendChild(el('div', 'warning', warning));
  }
  return container;
}
