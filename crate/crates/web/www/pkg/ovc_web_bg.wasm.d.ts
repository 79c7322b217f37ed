/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_scene_free: (a: number, b: number) => void;
export const probe_ring: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const ring_layout: () => [number, number];
export const scene_bundle_bytes: (a: number) => number;
export const scene_detect: (a: number, b: number, c: number) => [number, number, number, number];
export const scene_height: (a: number) => number;
export const scene_new: (a: bigint, b: number, c: number, d: number) => [number, number, number];
export const scene_pixels: (a: number) => [number, number];
export const scene_ring_at: (a: number, b: number, c: number) => [number, number];
export const scene_score_map: (a: number) => [number, number];
export const scene_stamp: (a: number, b: number, c: number, d: number) => number;
export const scene_width: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
