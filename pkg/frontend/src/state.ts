/**
 * Shared view state. The row selection is the linked-brushing contract:
 * whatever view changes it, every registered view re-renders from the same
 * set, so highlights always agree across scatterplot, heatmap and table.
 */

export type SelectionListener = (rows: ReadonlySet<number>, source: string) => void;

export class ViewState {
  private selection = new Set<number>();
  private listeners: SelectionListener[] = [];
  activeInstanceId: string | null = null;

  get selectedRows(): ReadonlySet<number> {
    return this.selection;
  }

  onSelection(listener: SelectionListener): void {
    this.listeners.push(listener);
  }

  setSelection(rows: Iterable<number>, source: string): void {
    this.selection = new Set(rows);
    for (const listener of this.listeners) {
      listener(this.selection, source);
    }
  }

  clearSelection(source: string): void {
    this.setSelection([], source);
  }

  toggleRow(row: number, source: string): void {
    const next = new Set(this.selection);
    if (next.has(row)) {
      next.delete(row);
    } else {
      next.add(row);
    }
    this.setSelection(next, source);
  }
}
