/* tslint:disable */
/* eslint-disable */

/**
 * An editable grayscale image plus the result of the last detection.
 */
export class Scene {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Size in bytes of the bundle the last detection would be sent as.
     */
    bundle_bytes(): number;
    /**
     * Runs detection and suppression. Returns corners flattened as
     * `[x, y, score, polarity, ...]` with polarity 0 bright, 1 dark.
     */
    detect(threshold: number, lanes: number): Uint32Array;
    height(): number;
    /**
     * Left image of the simulated rig's first frame.
     */
    constructor(seed: bigint, width: number, height: number, motifs: number);
    pixels(): Uint8Array;
    /**
     * Center followed by the 16 ring values around `(x, y)`, or empty when
     * the ring would leave the image.
     */
    ring_at(x: number, y: number): Uint8Array;
    /**
     * Pre-suppression scores of the last detection, one byte per pixel.
     */
    score_map(): Uint8Array;
    /**
     * Stamps a 7×7 motif whose center differs from its surround by
     * `contrast` (negative for a dark center). Returns false when it would
     * not fit.
     */
    stamp(x: number, y: number, contrast: number): boolean;
    width(): number;
}

/**
 * Segment test of a hand-edited ring: `[verdict, score]` where verdict is
 * -1 for no corner, 0 bright, 1 dark.
 */
export function probe_ring(center: number, ring: Uint8Array, threshold: number): Int32Array;

/**
 * Ring offsets flattened as `[dx0, dy0, dx1, dy1, ...]`, clockwise from north.
 */
export function ring_layout(): Int32Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_scene_free: (a: number, b: number) => void;
    readonly probe_ring: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly ring_layout: () => [number, number];
    readonly scene_bundle_bytes: (a: number) => number;
    readonly scene_detect: (a: number, b: number, c: number) => [number, number, number, number];
    readonly scene_height: (a: number) => number;
    readonly scene_new: (a: bigint, b: number, c: number, d: number) => [number, number, number];
    readonly scene_pixels: (a: number) => [number, number];
    readonly scene_ring_at: (a: number, b: number, c: number) => [number, number];
    readonly scene_score_map: (a: number) => [number, number];
    readonly scene_stamp: (a: number, b: number, c: number, d: number) => number;
    readonly scene_width: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
