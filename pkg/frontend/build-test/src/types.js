// Wire formats of the dashboard service REST API.
export {};
