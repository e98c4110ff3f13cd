/* tslint:disable */
/* eslint-disable */

/**
 * Generates a clustering sequence (JSON) from a scenario description.
 */
export function generate_scenario(spec: string): string;

/**
 * Life-cycle events of the tracked sequence, as a JSON array.
 */
export function lifecycle_events(input: string, history: number): string;

/**
 * Tracks a clustering sequence (JSON) and returns the alluvial diagram as SVG.
 */
export function render_alluvial(input: string, history: number, block_width: number, gap: number): string;

/**
 * Sweep rows for every history value in `min..=max`, as a JSON array.
 */
export function sweep_table(input: string, min: number, max: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly generate_scenario: (a: number, b: number) => [number, number, number, number];
    readonly lifecycle_events: (a: number, b: number, c: number) => [number, number, number, number];
    readonly render_alluvial: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly sweep_table: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
