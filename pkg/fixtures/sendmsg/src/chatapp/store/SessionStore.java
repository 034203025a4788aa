package chatapp.store;

import java.net.URL;

public class SessionStore {
    public String profileKey;
    URL endpoint;

    public SessionStore(URL endpoint) {
        this.endpoint = endpoint;
    }

    public String refresh() {
        this.profileKey = this.endpoint.getQuery();
        return this.profileKey;
    }
}
