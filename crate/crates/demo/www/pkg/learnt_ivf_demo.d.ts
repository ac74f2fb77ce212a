/* tslint:disable */
/* eslint-disable */

/**
 * A 2-D corpus plus the index and routers built on it.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Clusters the documents; `kind` is standard, spherical or shallow.
     */
    cluster(kind: string, clusters: number): string;
    constructor(n_docs: number, n_blobs: number, seed: bigint);
    /**
     * Document coordinates as a flat `[x0, y0, x1, y1, ...]` array.
     */
    points(): Float32Array;
    /**
     * Routes `(x, y)` to `ell` partitions and searches them for the top `k`
     * documents; `learnt` selects the trained router when one exists.
     */
    query(x: number, y: number, ell: number, k: number, learnt: boolean): string;
    /**
     * Trains a linear router on held-out queries and sweeps top-1 accuracy
     * for ell = 1..=L on the test split.
     */
    sweep(epochs: number, learning_rate: number): string;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_cluster: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demo_new: (a: number, b: number, c: bigint) => [number, number, number];
    readonly demo_points: (a: number) => [number, number];
    readonly demo_query: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly demo_sweep: (a: number, b: number, c: number) => [number, number, number, number];
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
